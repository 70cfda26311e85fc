//! Derivation of the CAR-preservation constraint system of a symbolic rule,
//! numeric verification of assignments, and the linear sector.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{CoefficientRing, FermionPolynomial, MonomialKey};
use crate::linalg::{max_abs, CMatrix};
use crate::rings::{SymPoly, SymbolError};
use crate::rules::LocalRule;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("tolerance must be positive and finite")]
    BadTolerance,
}

/// `{ψ'_x, ψ'_y}` or `{ψ'_x, (ψ'_y)†}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BracketKind {
    Pair,
    PairDagger,
}

impl BracketKind {
    pub fn tag(self) -> &'static str {
        match self {
            BracketKind::Pair => "pp",
            BracketKind::PairDagger => "pd",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        match tag {
            "pp" => Some(BracketKind::Pair),
            "pd" => Some(BracketKind::PairDagger),
            _ => None,
        }
    }
}

/// Where an equation came from: the site pair (positions in the site
/// order), the bracket, and the fermionic monomial whose coefficient it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    pub x: usize,
    pub y: usize,
    pub bracket: BracketKind,
    pub monomial: MonomialKey,
}

/// `lhs = rhs` with `rhs ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub lhs: SymPoly,
    pub rhs: u8,
    pub provenance: Provenance,
}

impl Equation {
    pub fn residual(&self, assignment: &BTreeMap<String, Complex64>) -> Result<f64, SymbolError> {
        let v = self.lhs.evaluate(assignment)?;
        Ok((v - Complex64::new(f64::from(self.rhs), 0.0)).norm())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSystem {
    pub equations: Vec<Equation>,
}

impl ConstraintSystem {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn variable_names(&self) -> BTreeSet<String> {
        self.equations.iter().flat_map(|e| e.lhs.variable_names()).map(|n| String::from(&*n)).collect()
    }

    /// Equations whose left-hand side is a nonzero multiple of `p`.
    pub fn contains_multiple_of(&self, p: &SymPoly) -> bool {
        let target = p.monic();
        self.equations.iter().any(|e| e.rhs == 0 && e.lhs.monic() == target)
    }

    /// Substitutes a polynomial for a variable everywhere, dropping
    /// equations that become `0 = 0`.
    pub fn substitute(&self, name: &str, value: &SymPoly) -> Self {
        let equations = self
            .equations
            .iter()
            .map(|e| Equation { lhs: e.lhs.substitute(name, value), rhs: e.rhs, provenance: e.provenance })
            .filter(|e| !(e.rhs == 0 && e.lhs.is_zero()))
            .collect();
        ConstraintSystem { equations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeriveOptions {
    /// Only brackets with `x = e`, which suffices on vertex-transitive graphs.
    pub anchor_at_identity: bool,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { anchor_at_identity: true }
    }
}

/// Builds the constraint system from the anticommutators of the evolved
/// fields. Equations equal up to a nonzero scalar are kept once.
pub fn derive_constraints(rule: &LocalRule<SymPoly>, options: DeriveOptions) -> ConstraintSystem {
    let n = rule.site_count();
    let fields = rule.evolved_operators();
    let adjoints: Vec<FermionPolynomial<SymPoly>> = fields.iter().map(FermionPolynomial::adjoint).collect();
    let base = rule.graph().site_of(crate::groups::Element::IDENTITY);
    let pairs: Vec<(usize, usize)> = if options.anchor_at_identity {
        (0..n).map(|y| (base, y)).collect()
    } else {
        (0..n).flat_map(|x| (x..n).map(move |y| (x, y))).collect()
    };
    let mut seen: BTreeSet<(SymPoly, u8)> = BTreeSet::new();
    let mut equations = Vec::new();
    for (x, y) in pairs {
        for bracket in [BracketKind::Pair, BracketKind::PairDagger] {
            let other = match bracket {
                BracketKind::Pair => &fields[y],
                BracketKind::PairDagger => &adjoints[y],
            };
            let value = fields[x].anticommute(other).expect("same modes");
            let needs_identity = bracket == BracketKind::PairDagger && x == y;
            let mut keys: BTreeSet<MonomialKey> = value.terms().map(|(k, _)| *k).collect();
            if needs_identity {
                keys.insert(MonomialKey::IDENTITY);
            }
            for key in keys {
                let lhs = value.coefficient(&key);
                let rhs = u8::from(needs_identity && key.is_identity());
                if rhs == 0 && lhs.is_zero() {
                    continue;
                }
                let normal = if rhs == 0 { lhs.monic() } else { lhs.clone() };
                if seen.insert((normal, rhs)) {
                    equations.push(Equation { lhs, rhs, provenance: Provenance { x, y, bracket, monomial: key } });
                }
            }
        }
    }
    ConstraintSystem { equations }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub max_residual: f64,
    pub failures: Vec<(Provenance, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates every equation at the assignment.
pub fn verify_solution(
    system: &ConstraintSystem,
    assignment: &BTreeMap<String, Complex64>,
    tolerance: f64,
) -> Result<VerificationReport, ConstraintError> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(ConstraintError::BadTolerance);
    }
    let mut max_residual = 0.0_f64;
    let mut failures = Vec::new();
    for eq in &system.equations {
        let r = eq.residual(assignment)?;
        let r = if r.is_nan() { f64::INFINITY } else { r };
        max_residual = max_residual.max(r);
        if r > tolerance {
            failures.push((eq.provenance, r));
        }
    }
    Ok(VerificationReport { max_residual, failures, tolerance, pass: max_residual <= tolerance })
}

/// Degree-one part of a numeric rule as matrices over sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSector {
    /// `A[x][y]`: coefficient of `ψ_y` in `ψ'_x`.
    pub a: CMatrix,
    /// `Γ[x][y]`: coefficient of `ψ†_y` in `ψ'_x`.
    pub gamma: CMatrix,
    /// `[[A, Γ], [Γ̄, Ā]]`.
    pub bogoliubov: CMatrix,
    /// Largest entry of `W W† - I` and `W† W - I`.
    pub residual: f64,
}

impl LinearSector {
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

pub fn linear_sector(rule: &LocalRule<Complex64>) -> LinearSector {
    let n = rule.site_count();
    let mut a = DMatrix::zeros(n, n);
    let mut gamma = DMatrix::zeros(n, n);
    for (x, field) in rule.evolved_operators().iter().enumerate() {
        for (key, coeff) in field.terms() {
            if key.degree() != 1 {
                continue;
            }
            if key.annihilators != 0 {
                a[(x, key.annihilators.trailing_zeros() as usize)] = *coeff;
            } else {
                gamma[(x, key.creators.trailing_zeros() as usize)] = *coeff;
            }
        }
    }
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    w.view_mut((0, 0), (n, n)).copy_from(&a);
    w.view_mut((0, n), (n, n)).copy_from(&gamma);
    w.view_mut((n, 0), (n, n)).copy_from(&gamma.map(|z: Complex64| z.conj()));
    w.view_mut((n, n), (n, n)).copy_from(&a.map(|z: Complex64| z.conj()));
    let id = DMatrix::identity(2 * n, 2 * n);
    let residual = max_abs(&(&w * w.adjoint() - &id)).max(max_abs(&(w.adjoint() * &w - &id)));
    LinearSector { a, gamma, bogoliubov: w, residual }
}
