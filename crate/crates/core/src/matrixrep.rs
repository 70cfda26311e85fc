//! Jordan–Wigner representation, evolution-unitary synthesis, the global
//! flip, and named sector blocks.
//!
//! Occupation strings list sites in site order; character `k` is the
//! occupation of site `k`. The basis vector of a string `s` is
//! `(ψ†_N)^{s_N}…(ψ†_1)^{s_1}|Ω⟩`, which coincides with the qubit basis under
//! `J(ψ_j) = I⊗…⊗σ⁻_j⊗σᶻ⊗…⊗σᶻ`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{CoefficientRing, FermionPolynomial, ToComplex};
use crate::groups::CayleyGraph;
use crate::linalg::{c, max_abs, null_space, unitarity_residual, CMatrix, CVector};
use crate::rules::{CaseId, LocalRule};

/// Relative singular-value threshold for rank decisions.
pub const NULL_SPACE_TOL: f64 = 1e-9;
/// Unitarity tolerance for synthesized matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("polynomial has a non-numeric coefficient")]
    SymbolicCoefficient,
    #[error("polynomial has {poly} modes but the ordering has {ordering} sites")]
    ModeMismatch { poly: usize, ordering: usize },
    #[error("invalid basis ordering: {0}")]
    BadOrdering(String),
    #[error("ordering does not match: {0}")]
    OrderingMismatch(String),
    #[error("intertwiner space has dimension {0}, expected 1")]
    NullSpaceDimension(usize),
    #[error("synthesized matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("matrix neither preserves nor flips parity")]
    ParityMixed,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Site labels plus an explicit sequence of occupation strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisOrdering {
    sites: Vec<String>,
    /// Bit `k` of a state is the occupation of site `k`.
    states: Vec<u32>,
    position: Vec<usize>,
}

pub const KLEIN_STATES: [&str; 16] = [
    "0000", "0011", "0101", "0110", "1100", "1010", "1001", "1111", "1000", "0100", "0010", "0001", "1110", "1101",
    "1011", "0111",
];

pub const CYCLIC5_STATES: [&str; 32] = [
    "00000", "11000", "10100", "10010", "10001", "01100", "01010", "01001", "00110", "00101", "00011", "11110",
    "11101", "11011", "10111", "01111", "10000", "01000", "00100", "00010", "00001", "11100", "11001", "10011",
    "00111", "01110", "01011", "10101", "11010", "01101", "10110", "11111",
];

fn parse_state(s: &str, n: usize) -> Result<u32, MatrixError> {
    if s.chars().count() != n {
        return Err(MatrixError::BadOrdering(alloc::format!("state `{}` must have {} characters", s, n)));
    }
    let mut bits = 0u32;
    for (k, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => bits |= 1 << k,
            _ => return Err(MatrixError::BadOrdering(alloc::format!("state `{}` is not a 0/1 string", s))),
        }
    }
    Ok(bits)
}

impl BasisOrdering {
    pub fn new(sites: Vec<String>, states: &[&str]) -> Result<Self, MatrixError> {
        let n = sites.len();
        if n > 20 {
            return Err(MatrixError::BadOrdering("too many sites".into()));
        }
        let dim = 1usize << n;
        if states.len() != dim {
            return Err(MatrixError::BadOrdering(alloc::format!("expected {} states, got {}", dim, states.len())));
        }
        let mut position = alloc::vec![usize::MAX; dim];
        let mut bits = Vec::with_capacity(dim);
        for (i, s) in states.iter().enumerate() {
            let b = parse_state(s, n)?;
            if position[b as usize] != usize::MAX {
                return Err(MatrixError::BadOrdering(alloc::format!("state `{}` repeated", s)));
            }
            position[b as usize] = i;
            bits.push(b);
        }
        Ok(BasisOrdering { sites, states: bits, position })
    }

    /// States sorted by parity (even first), then particle number, then
    /// reverse lexicographic order of the string.
    pub fn sector_ordered(sites: Vec<String>) -> Result<Self, MatrixError> {
        let n = sites.len();
        let mut strings: Vec<String> = (0..1u32 << n).map(|b| state_string(b, n)).collect();
        strings.sort_by(|a, b| {
            let (na, nb) = (a.matches('1').count(), b.matches('1').count());
            (na % 2, na, core::cmp::Reverse(a.clone())).cmp(&(nb % 2, nb, core::cmp::Reverse(b.clone())))
        });
        let refs: Vec<&str> = strings.iter().map(String::as_str).collect();
        Self::new(sites, &refs)
    }

    /// The printed basis of a case study.
    pub fn for_case(case: CaseId) -> Self {
        let graph = case.graph();
        let states: &[&str] = match case {
            CaseId::KleinFour => &KLEIN_STATES,
            CaseId::Cyclic5 => &CYCLIC5_STATES,
        };
        Self::new(graph.site_labels(), states).expect("valid preset ordering")
    }

    /// Default ordering for a graph: the case-study basis when the graph is
    /// one of the presets, otherwise the sector ordering.
    pub fn for_graph(graph: &CayleyGraph) -> Result<Self, MatrixError> {
        for case in [CaseId::KleinFour, CaseId::Cyclic5] {
            if *graph == case.graph() {
                return Ok(Self::for_case(case));
            }
        }
        Self::sector_ordered(graph.site_labels())
    }

    pub fn sites(&self) -> &[String] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Occupation bits of the state at a 0-based position.
    pub fn state(&self, index: usize) -> u32 {
        self.states[index]
    }

    /// 0-based position of an occupation bit pattern.
    pub fn position(&self, bits: u32) -> usize {
        self.position[bits as usize]
    }

    pub fn state_strings(&self) -> Vec<String> {
        self.states.iter().map(|&b| state_string(b, self.sites.len())).collect()
    }

    pub fn vacuum_position(&self) -> usize {
        self.position(0)
    }

    pub fn full_position(&self) -> usize {
        self.position(((1u64 << self.sites.len()) - 1) as u32)
    }

    /// 0-based positions of the states with even (`false`) or odd particle number.
    pub fn parity_positions(&self, odd: bool) -> Vec<usize> {
        (0..self.dim()).filter(|&i| (self.states[i].count_ones() % 2 == 1) == odd).collect()
    }

    /// 0-based positions of the states with the given particle number.
    pub fn number_positions(&self, n: u32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.states[i].count_ones() == n).collect()
    }

    fn check_graph(&self, graph: &CayleyGraph) -> Result<(), MatrixError> {
        if graph.site_labels() != self.sites {
            return Err(MatrixError::OrderingMismatch("site labels differ from the graph's site order".into()));
        }
        Ok(())
    }
}

pub fn state_string(bits: u32, n: usize) -> String {
    (0..n).map(|k| if bits >> k & 1 == 1 { '1' } else { '0' }).collect()
}

/// Jordan–Wigner image of a numeric polynomial in the ordering's basis.
pub fn jordan_wigner<R: CoefficientRing + ToComplex>(
    p: &FermionPolynomial<R>,
    ordering: &BasisOrdering,
) -> Result<CMatrix, MatrixError> {
    let n = ordering.site_count();
    if p.modes() != n {
        return Err(MatrixError::ModeMismatch { poly: p.modes(), ordering: n });
    }
    let dim = ordering.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (key, coeff) in p.terms() {
        let value = coeff.to_complex().ok_or(MatrixError::SymbolicCoefficient)?;
        let ops = key.ops();
        for col in 0..dim {
            let mut state = ordering.state(col);
            let mut negative = false;
            let mut alive = true;
            for op in ops.iter().rev() {
                let bit = 1u32 << op.site;
                let occupied = state & bit != 0;
                if occupied == op.dagger {
                    alive = false;
                    break;
                }
                // σᶻ on every later site contributes its occupation parity.
                let later = state & !((bit << 1).wrapping_sub(1));
                negative ^= later.count_ones() % 2 == 1;
                state ^= bit;
            }
            if alive {
                let row = ordering.position(state);
                m[(row, col)] += if negative { -value } else { value };
            }
        }
    }
    Ok(m)
}

/// Even-parity preserving or odd-parity flipping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityKind {
    Preserving,
    Flipping,
}

/// Parity leakage: norms of the blocks coupling even and odd (for
/// preserving) or even and even (for flipping) sectors.
pub fn parity_leakage(m: &CMatrix, ordering: &BasisOrdering) -> (f64, f64) {
    let mut cross = 0.0_f64;
    let mut same = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let pi = ordering.state(i).count_ones() % 2;
            let pj = ordering.state(j).count_ones() % 2;
            let v = m[(i, j)].norm();
            if pi == pj {
                same = same.max(v);
            } else {
                cross = cross.max(v);
            }
        }
    }
    (cross, same)
}

pub fn classify_parity(m: &CMatrix, ordering: &BasisOrdering, tol: f64) -> Result<ParityKind, MatrixError> {
    let (cross, same) = parity_leakage(m, ordering);
    match (cross <= tol, same <= tol) {
        (true, false) => Ok(ParityKind::Preserving),
        (false, true) => Ok(ParityKind::Flipping),
        _ => Err(MatrixError::ParityMixed),
    }
}

/// A unitary in a fixed basis ordering with its parity class.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub matrix: CMatrix,
    pub ordering: BasisOrdering,
    pub parity: ParityKind,
}

impl EvolutionMatrix {
    pub fn new(matrix: CMatrix, ordering: BasisOrdering, tol: f64) -> Result<Self, MatrixError> {
        if matrix.nrows() != ordering.dim() || matrix.ncols() != ordering.dim() {
            return Err(MatrixError::DimensionMismatch(matrix.nrows(), ordering.dim()));
        }
        let residual = unitarity_residual(&matrix);
        if residual > tol {
            return Err(MatrixError::NotUnitary(residual));
        }
        let parity = classify_parity(&matrix, &ordering, tol)?;
        Ok(EvolutionMatrix { matrix, ordering, parity })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry by 1-based positions in the state order.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row - 1, col - 1)]
    }
}

/// Synthesis route for [`synthesize_unitary_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMethod {
    /// Seeds `X` from candidate vacuum images and solves the intertwining
    /// equations on that small space.
    VacuumSeeded,
    /// Null space of the full stacked map `X ↦ M'_j X - X M_j` on `4^N`
    /// unknowns.
    StackedSvd,
}

/// The unitary `U` with `U J(ψ_j) U† = J(ψ'_j)` for every site.
pub fn synthesize_unitary(rule: &LocalRule<Complex64>, ordering: &BasisOrdering) -> Result<EvolutionMatrix, MatrixError> {
    synthesize_unitary_with(rule, ordering, SynthesisMethod::VacuumSeeded)
}

pub fn synthesize_unitary_with(
    rule: &LocalRule<Complex64>,
    ordering: &BasisOrdering,
    method: SynthesisMethod,
) -> Result<EvolutionMatrix, MatrixError> {
    ordering.check_graph(rule.graph())?;
    let n = rule.site_count();
    let plain: Vec<CMatrix> = (0..n)
        .map(|j| jordan_wigner(&FermionPolynomial::<Complex64>::annihilator(n, j).expect("in range"), ordering))
        .collect::<Result<_, _>>()?;
    let evolved: Vec<CMatrix> =
        rule.evolved_operators().iter().map(|p| jordan_wigner(p, ordering)).collect::<Result<_, _>>()?;
    let x = match method {
        SynthesisMethod::VacuumSeeded => vacuum_seeded(&plain, &evolved, ordering)?,
        SynthesisMethod::StackedSvd => stacked_svd(&plain, &evolved)?,
    };
    let x = fix_phase(normalize(x), ordering);
    EvolutionMatrix::new(x, ordering.clone(), UNITARY_TOL)
}

fn normalize(x: CMatrix) -> CMatrix {
    let dim = x.nrows() as f64;
    let norm = x.norm();
    if norm == 0.0 {
        return x;
    }
    x * c(libm::sqrt(dim) / norm, 0.0)
}

/// Makes the first nonzero entry of the vacuum column real and positive.
fn fix_phase(x: CMatrix, ordering: &BasisOrdering) -> CMatrix {
    let col = ordering.vacuum_position();
    let scale = max_abs(&x);
    for row in 0..x.nrows() {
        let z = x[(row, col)];
        if z.norm() > NULL_SPACE_TOL * scale {
            let phase = z.conj() / z.norm();
            return x * phase;
        }
    }
    x
}

fn stacked_svd(plain: &[CMatrix], evolved: &[CMatrix]) -> Result<CMatrix, MatrixError> {
    let d = plain[0].nrows();
    let id = CMatrix::identity(d, d);
    let mut blocks = Vec::new();
    for (m, mp) in plain.iter().zip(evolved) {
        // vec(A X B) = (Bᵀ ⊗ A) vec(X) for column-major vec.
        blocks.push(id.kronecker(mp) - m.transpose().kronecker(&id));
        blocks.push(id.kronecker(&mp.adjoint()) - m.adjoint().transpose().kronecker(&id));
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = CMatrix::zeros(rows, d * d);
    let mut r = 0;
    for b in &blocks {
        stacked.view_mut((r, 0), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
    }
    let k = null_space(&stacked, NULL_SPACE_TOL);
    if k.ncols() != 1 {
        return Err(MatrixError::NullSpaceDimension(k.ncols()));
    }
    Ok(CMatrix::from_column_slice(d, d, k.column(0).as_slice()))
}

/// An intertwiner `X` with `M'_j X = X M_j` maps the vacuum into the common
/// kernel `K` of the `M'_j`, and is fixed on the rest of the basis by
/// `X|s⟩ = ∏ M'†_j X|Ω⟩`. Solving the remaining intertwining equations on the
/// few-dimensional `K` is equivalent to the full null-space problem.
fn vacuum_seeded(plain: &[CMatrix], evolved: &[CMatrix], ordering: &BasisOrdering) -> Result<CMatrix, MatrixError> {
    let d = ordering.dim();
    let n = plain.len();
    let mut stacked = CMatrix::zeros(n * d, d);
    for (j, mp) in evolved.iter().enumerate() {
        stacked.view_mut((j * d, 0), (d, d)).copy_from(mp);
    }
    let kernel = null_space(&stacked, NULL_SPACE_TOL);
    if kernel.ncols() == 0 {
        return Err(MatrixError::NullSpaceDimension(0));
    }
    let creators: Vec<CMatrix> = evolved.iter().map(|m| m.adjoint()).collect();
    let build = |u0: CVector| -> CMatrix {
        let mut x = CMatrix::zeros(d, d);
        for col in 0..d {
            let bits = ordering.state(col);
            let mut v = u0.clone();
            for (j, cj) in creators.iter().enumerate() {
                if bits >> j & 1 == 1 {
                    v = cj * v;
                }
            }
            x.set_column(col, &v);
        }
        x
    };
    let candidates: Vec<CMatrix> = kernel.column_iter().map(|k| build(k.into_owned())).collect();
    let mut residuals: Vec<CVector> = Vec::with_capacity(candidates.len());
    let mut scale = 0.0_f64;
    for x in &candidates {
        let mut parts: Vec<Complex64> = Vec::with_capacity(2 * n * d * d);
        let mut size = 0.0_f64;
        for (m, mp) in plain.iter().zip(evolved) {
            let (a, b) = (mp * x, x * m);
            let (ad, bd) = (mp.adjoint() * x, x * m.adjoint());
            size = size.max(a.norm()).max(b.norm()).max(ad.norm()).max(bd.norm());
            parts.extend((a - b).iter().copied());
            parts.extend((ad - bd).iter().copied());
        }
        scale = scale.max(size);
        residuals.push(CVector::from_vec(parts));
    }
    let r = CMatrix::from_columns(&residuals);
    // Rank decision relative to the size of the individual terms, so that a
    // candidate whose residual is pure rounding counts as a solution.
    let svd = nalgebra::SVD::new(
        if r.nrows() < r.ncols() { r.clone().resize_vertically(r.ncols(), c(0.0, 0.0)) } else { r.clone() },
        false,
        true,
    );
    let v_t = svd.v_t.expect("requested V");
    let threshold = NULL_SPACE_TOL * scale.max(f64::MIN_POSITIVE);
    let null: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if null.len() != 1 {
        return Err(MatrixError::NullSpaceDimension(null.len()));
    }
    let coeffs = &null[0];
    let mut x = CMatrix::zeros(d, d);
    for (k, cand) in candidates.iter().enumerate() {
        x += cand * coeffs[k];
    }
    Ok(x)
}

/// `J(∏_g (ψ_g + ψ†_g))` with the product taken in site order.
pub fn flip_operator(ordering: &BasisOrdering) -> Result<CMatrix, MatrixError> {
    let n = ordering.site_count();
    let mut product = FermionPolynomial::<Complex64>::identity(n).map_err(|_| MatrixError::BadOrdering("too many sites".into()))?;
    for j in 0..n {
        let factor = FermionPolynomial::annihilator(n, j)
            .and_then(|a| a.add(&FermionPolynomial::creator(n, j)?))
            .expect("in range");
        product = product.multiply(&factor).expect("same modes");
    }
    jordan_wigner(&product, ordering)
}

/// Named blocks of a case-study unitary (1-based ranges in the state order)
/// plus leakage norms outside the block structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBlocks {
    pub blocks: BTreeMap<String, CMatrix>,
    pub leakage: BTreeMap<String, f64>,
}

fn sub(m: &CMatrix, rows: (usize, usize), cols: (usize, usize)) -> CMatrix {
    m.view((rows.0 - 1, cols.0 - 1), (rows.1 - rows.0 + 1, cols.1 - cols.0 + 1)).into_owned()
}

/// `(name, rows, cols)` with 1-based inclusive ranges.
type BlockSpec = (&'static str, (usize, usize), (usize, usize));

pub fn sector_blocks(u: &EvolutionMatrix, case: CaseId) -> Result<SectorBlocks, MatrixError> {
    let expected = BasisOrdering::for_case(case);
    if u.ordering != expected {
        return Err(MatrixError::OrderingMismatch(alloc::format!("blocks need the {} case ordering", case.name())));
    }
    let m = &u.matrix;
    let layout: &[BlockSpec] = match case {
        CaseId::KleinFour => &[
            ("vacuum", (1, 1), (1, 1)),
            ("A", (2, 4), (2, 4)),
            ("B", (2, 4), (5, 7)),
            ("B_lower", (5, 7), (2, 4)),
            ("A_lower", (5, 7), (5, 7)),
            ("full", (8, 8), (8, 8)),
            ("S", (9, 12), (9, 12)),
            ("T", (13, 16), (13, 16)),
        ],
        CaseId::Cyclic5 => &[
            ("vacuum", (1, 1), (1, 1)),
            ("D", (2, 11), (2, 11)),
            ("C", (12, 16), (12, 16)),
            ("A", (17, 21), (17, 21)),
            ("B", (22, 31), (22, 31)),
            ("full", (32, 32), (32, 32)),
        ],
    };
    let mut blocks = BTreeMap::new();
    let mut covered = alloc::vec![false; m.nrows() * m.ncols()];
    for &(name, rows, cols) in layout {
        blocks.insert(name.to_string(), sub(m, rows, cols));
        for r in rows.0..=rows.1 {
            for cc in cols.0..=cols.1 {
                covered[(r - 1) * m.ncols() + (cc - 1)] = true;
            }
        }
    }
    let mut outside = 0.0_f64;
    for r in 0..m.nrows() {
        for cc in 0..m.ncols() {
            if !covered[r * m.ncols() + cc] {
                outside = outside.max(m[(r, cc)].norm());
            }
        }
    }
    let (cross, _) = parity_leakage(m, &u.ordering);
    let mut leakage = BTreeMap::new();
    leakage.insert("outside_blocks".to_string(), outside);
    leakage.insert("parity".to_string(), cross);
    Ok(SectorBlocks { blocks, leakage })
}
