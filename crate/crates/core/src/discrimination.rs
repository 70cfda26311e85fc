//! Discrimination between two evolutions through the eigenvalue polygon of
//! the relative unitary `Ũ = U₀†U₁`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use core::f64::consts::PI;
use num_traits::Euclid;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{normal_eigen, unitarity_residual, CMatrix, CVector};
use crate::matrixrep::{classify_parity, BasisOrdering, EvolutionMatrix, MatrixError, ParityKind, UNITARY_TOL};

/// Distinctness tolerance for eigenvalues on the unit circle.
pub const CLUSTER_TOL: f64 = 1e-9;
const PARITY_TOL: f64 = 1e-8;
const GEOMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscriminationError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("the two matrices use different basis orderings")]
    OrderingMismatch,
    #[error("input is not unitary (residual {0:e})")]
    NonUnitary(f64),
    #[error("the requested sector is not invariant (leakage {0:e})")]
    SectorNotInvariant(f64),
    #[error("the requested sector is empty")]
    EmptySector,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EigenParity {
    Even,
    Odd,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: Complex64,
    pub parity: EigenParity,
    /// Eigenvector in the full basis ordering.
    pub vector: CVector,
}

/// Which part of the state space to analyse.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum AnalysisScope {
    #[default]
    Full,
    /// The span of the states with these particle numbers.
    ParticleNumbers(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnalysisOptions {
    pub scope: AnalysisScope,
    /// Use the better single-parity polygon in `standard_p_opt`.
    pub parity_restricted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationReport {
    pub eigenpairs: Vec<Eigenpair>,
    pub hull_distance_full: f64,
    /// `None` when no eigenvector of that parity exists.
    pub hull_distance_even: Option<f64>,
    pub hull_distance_odd: Option<f64>,
    /// Eigenpair index → probability weight of the closest hull point.
    pub optimal_weights: BTreeMap<usize, f64>,
    pub sine_p_succ: f64,
    pub standard_p_opt: f64,
    pub perfectly_discriminable: bool,
    pub local_strategy_sufficient: bool,
}

impl DiscriminationReport {
    /// Distinct eigenvalues (one representative per cluster).
    pub fn distinct_eigenvalues(&self) -> Vec<Complex64> {
        cluster(&self.eigenpairs.iter().map(|e| e.value).collect::<Vec<_>>()).into_iter().map(|(z, _)| z).collect()
    }
}

/// `Ũ₁ = U₀†U₁`.
pub fn relative_unitary(u0: &EvolutionMatrix, u1: &EvolutionMatrix) -> Result<EvolutionMatrix, DiscriminationError> {
    if u0.dim() != u1.dim() {
        return Err(DiscriminationError::DimensionMismatch(u0.dim(), u1.dim()));
    }
    if u0.ordering != u1.ordering {
        return Err(DiscriminationError::OrderingMismatch);
    }
    let m = u0.matrix.adjoint() * &u1.matrix;
    Ok(EvolutionMatrix::new(m, u0.ordering.clone(), UNITARY_TOL)?)
}

pub fn analyze(u: &EvolutionMatrix, options: &AnalysisOptions) -> Result<DiscriminationReport, DiscriminationError> {
    analyze_matrix(&u.matrix, &u.ordering, options)
}

/// Analysis of a bare unitary matrix in a basis ordering.
pub fn analyze_matrix(
    m: &CMatrix,
    ordering: &BasisOrdering,
    options: &AnalysisOptions,
) -> Result<DiscriminationReport, DiscriminationError> {
    if m.nrows() != ordering.dim() || m.ncols() != ordering.dim() {
        return Err(DiscriminationError::DimensionMismatch(m.nrows(), ordering.dim()));
    }
    let residual = unitarity_residual(m);
    if residual > UNITARY_TOL {
        return Err(DiscriminationError::NonUnitary(residual));
    }
    let scope: Vec<usize> = match &options.scope {
        AnalysisScope::Full => (0..ordering.dim()).collect(),
        AnalysisScope::ParticleNumbers(ns) => {
            (0..ordering.dim()).filter(|&i| ns.contains(&ordering.state(i).count_ones())).collect()
        }
    };
    if scope.is_empty() {
        return Err(DiscriminationError::EmptySector);
    }
    let leak = leakage(m, &scope);
    if leak > UNITARY_TOL {
        return Err(DiscriminationError::SectorNotInvariant(leak));
    }

    let preserving = matches!(classify_parity(m, ordering, UNITARY_TOL), Ok(ParityKind::Preserving));
    let mut eigenpairs = Vec::new();
    if preserving {
        for odd in [false, true] {
            let idx: Vec<usize> = scope.iter().copied().filter(|&i| (ordering.state(i).count_ones() % 2 == 1) == odd).collect();
            let parity = if odd { EigenParity::Odd } else { EigenParity::Even };
            eigenpairs.extend(eigen_on(m, &idx).into_iter().map(|(value, vector)| Eigenpair { value, parity, vector }));
        }
    } else {
        for (value, vector) in eigen_on(m, &scope) {
            let parity = classify_vector(&vector, ordering);
            eigenpairs.push(Eigenpair { value, parity, vector });
        }
    }

    let all: Vec<Complex64> = eigenpairs.iter().map(|e| e.value).collect();
    let (hull_distance_full, weights) = hull_with_weights(&all);
    let restricted = |p: EigenParity| -> Option<f64> {
        let pts: Vec<Complex64> = eigenpairs.iter().filter(|e| e.parity == p).map(|e| e.value).collect();
        (!pts.is_empty()).then(|| hull_with_weights(&pts).0)
    };
    let hull_distance_even = restricted(EigenParity::Even);
    let hull_distance_odd = restricted(EigenParity::Odd);
    let best_single = match (hull_distance_even, hull_distance_odd) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let local_strategy_sufficient = best_single.is_some_and(|d| (d - hull_distance_full).abs() <= UNITARY_TOL);
    let applicable = if options.parity_restricted { best_single.unwrap_or(hull_distance_full) } else { hull_distance_full };
    let optimal_weights = weights.into_iter().filter(|(_, w)| *w > 0.0).collect();

    Ok(DiscriminationReport {
        sine_p_succ: sine_p_succ(&all),
        standard_p_opt: standard_p_opt(applicable),
        perfectly_discriminable: hull_distance_full <= UNITARY_TOL,
        eigenpairs,
        hull_distance_full,
        hull_distance_even,
        hull_distance_odd,
        optimal_weights,
        local_strategy_sufficient,
    })
}

fn leakage(m: &CMatrix, scope: &[usize]) -> f64 {
    let mut inside = alloc::vec![false; m.nrows()];
    for &i in scope {
        inside[i] = true;
    }
    let mut worst = 0.0_f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if inside[r] != inside[c] {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    worst
}

fn eigen_on(m: &CMatrix, idx: &[usize]) -> Vec<(Complex64, CVector)> {
    if idx.is_empty() {
        return Vec::new();
    }
    let k = idx.len();
    let block = CMatrix::from_fn(k, k, |r, c| m[(idx[r], idx[c])]);
    let (values, vectors) = normal_eigen(&block, CLUSTER_TOL);
    values
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            let mut full = CVector::zeros(m.nrows());
            for (r, &i) in idx.iter().enumerate() {
                full[i] = vectors[(r, j)];
            }
            (v, full)
        })
        .collect()
}

fn classify_vector(v: &CVector, ordering: &BasisOrdering) -> EigenParity {
    let odd: f64 = (0..v.len()).filter(|&i| ordering.state(i).count_ones() % 2 == 1).map(|i| v[i].norm_sqr()).sum();
    let total = v.norm_squared();
    if odd <= PARITY_TOL * total {
        EigenParity::Even
    } else if odd >= (1.0 - PARITY_TOL) * total {
        EigenParity::Odd
    } else {
        EigenParity::Mixed
    }
}

/// Groups points closer than [`CLUSTER_TOL`]; returns representatives with
/// the indices of their members.
fn cluster(points: &[Complex64]) -> Vec<(Complex64, Vec<usize>)> {
    let mut out: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        match out.iter_mut().find(|(q, _)| (p - *q).norm() <= CLUSTER_TOL) {
            Some((_, members)) => members.push(i),
            None => out.push((p, alloc::vec![i])),
        }
    }
    out
}

/// Distance from the origin to the convex hull of points on the unit
/// circle, with weights (by input index) of a closest hull point.
pub fn hull_with_weights(points: &[Complex64]) -> (f64, BTreeMap<usize, f64>) {
    let clusters = cluster(points);
    let reps: Vec<Complex64> = clusters.iter().map(|(z, _)| *z).collect();
    let (d, w) = hull_of_distinct(&reps);
    let weights = w.into_iter().map(|(k, p)| (clusters[k].1[0], p)).collect();
    (d, weights)
}

pub fn hull_distance(points: &[Complex64]) -> f64 {
    hull_with_weights(points).0
}

fn segment(a: Complex64, b: Complex64) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 == 0.0 { 0.0 } else { (-(a.re * ab.re + a.im * ab.im) / len2).clamp(0.0, 1.0) };
    ((a + ab * t).norm(), t)
}

fn barycentric(a: Complex64, b: Complex64, c: Complex64) -> Option<[f64; 3]> {
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let area = cross(b - a, c - a);
    if area.abs() <= GEOMETRY_TOL {
        return None;
    }
    let wa = cross(b, c) / area;
    let wb = cross(c, a) / area;
    let wc = cross(a, b) / area;
    let lo = -GEOMETRY_TOL;
    (wa >= lo && wb >= lo && wc >= lo).then(|| [wa.max(0.0), wb.max(0.0), wc.max(0.0)])
}

fn hull_of_distinct(p: &[Complex64]) -> (f64, Vec<(usize, f64)>) {
    match p.len() {
        0 => (f64::NAN, Vec::new()),
        1 => (p[0].norm(), alloc::vec![(0, 1.0)]),
        2 => {
            let (d, t) = segment(p[0], p[1]);
            (d, alloc::vec![(0, 1.0 - t), (1, t)])
        }
        3 => {
            if let Some(w) = barycentric(p[0], p[1], p[2]) {
                return (0.0, alloc::vec![(0, w[0]), (1, w[1]), (2, w[2])]);
            }
            let mut best = (f64::INFINITY, Vec::new());
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                let (d, t) = segment(p[i], p[j]);
                if d < best.0 {
                    best = (d, alloc::vec![(i, 1.0 - t), (j, t)]);
                }
            }
            best
        }
        _ => largest_gap(p),
    }
}

fn largest_gap(p: &[Complex64]) -> (f64, Vec<(usize, f64)>) {
    let mut order: Vec<(f64, usize)> = p.iter().enumerate().map(|(i, z)| (Euclid::rem_euclid(&z.arg(), &(2.0 * PI)), i)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let n = order.len();
    let mut gap = (0.0, 0);
    for k in 0..n {
        let next = if k + 1 < n { order[k + 1].0 } else { order[0].0 + 2.0 * PI };
        let g = next - order[k].0;
        if g > gap.0 {
            gap = (g, k);
        }
    }
    let (g, k) = gap;
    let (i, j) = (order[k].1, order[(k + 1) % n].1);
    if g >= PI - GEOMETRY_TOL {
        let d = (-libm::cos(g / 2.0)).max(0.0);
        let (_, t) = segment(p[i], p[j]);
        return (d, alloc::vec![(i, 1.0 - t), (j, t)]);
    }
    // The origin is interior: find a fan triangle from the first vertex.
    let a = order[0].1;
    for w in 1..n - 1 {
        let (b, c) = (order[w].1, order[w + 1].1);
        if let Some(bw) = barycentric(p[a], p[b], p[c]) {
            return (0.0, alloc::vec![(a, bw[0]), (b, bw[1]), (c, bw[2])]);
        }
    }
    (0.0, Vec::new())
}

/// `sin(Θ/2)` with `Θ` the largest pairwise angular separation in `[0, π]`.
pub fn sine_p_succ(points: &[Complex64]) -> f64 {
    let mut theta = 0.0_f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = Euclid::rem_euclid(&(a.arg() - b.arg()).abs(), &(2.0 * PI));
            theta = theta.max(d.min(2.0 * PI - d));
        }
    }
    libm::sin(theta.clamp(0.0, PI) / 2.0)
}

/// `(1 + √(1 - d²)) / 2`.
pub fn standard_p_opt(d: f64) -> f64 {
    (1.0 + libm::sqrt((1.0 - d * d).max(0.0))) / 2.0
}
