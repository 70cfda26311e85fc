//! Closed-form solution families for the two case studies. Free quantities
//! are inputs; every dependent coefficient is computed from the closure
//! relations of its family.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use num_complex::Complex64;

use super::{descriptor_name, LocalRule, MonomialDescriptor, QuinticName, RuleError};
use crate::groups::CayleyGraph;

/// Phase tolerance used when checking relations between input angles.
const PHASE_TOL: f64 = 1e-9;

/// The two case studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseId {
    /// `ℤ₂×ℤ₂`, number-preserving rules.
    KleinFour,
    /// `ℤ₅`, general rules.
    Cyclic5,
}

impl CaseId {
    pub fn name(self) -> &'static str {
        match self {
            CaseId::KleinFour => "Z2xZ2",
            CaseId::Cyclic5 => "Z5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "z2xz2" | "klein" => Some(CaseId::KleinFour),
            "z5" => Some(CaseId::Cyclic5),
            _ => None,
        }
    }

    pub fn graph(self) -> CayleyGraph {
        match self {
            CaseId::KleinFour => CayleyGraph::klein_four(),
            CaseId::Cyclic5 => CayleyGraph::cyclic_five(),
        }
    }

    pub fn quintic_name(self) -> QuinticName {
        match self {
            CaseId::KleinFour => QuinticName::Gamma,
            CaseId::Cyclic5 => QuinticName::Mu,
        }
    }

    /// Whether the case is studied with number-preserving rules only.
    pub fn number_preserving(self) -> bool {
        self == CaseId::KleinFour
    }
}

/// A family parameter: a real number or a group-element label.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Label(String),
}

/// Named family parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FamilyParams(pub BTreeMap<String, ParamValue>);

impl FamilyParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn real(mut self, name: &str, v: f64) -> Self {
        self.0.insert(name.to_string(), ParamValue::Real(v));
        self
    }

    pub fn label(mut self, name: &str, v: &str) -> Self {
        self.0.insert(name.to_string(), ParamValue::Label(v.to_string()));
        self
    }

    fn get_real(&self, name: &str, default: Option<f64>) -> Result<f64, RuleError> {
        match self.0.get(name) {
            Some(ParamValue::Real(v)) if v.is_finite() => Ok(*v),
            Some(_) => Err(RuleError::InvalidParameter { name: name.to_string(), reason: "expected a finite number".into() }),
            None => default.ok_or_else(|| RuleError::MissingParameter(name.to_string())),
        }
    }

    fn get_label(&self, name: &str, default: &str) -> Result<String, RuleError> {
        match self.0.get(name) {
            Some(ParamValue::Label(v)) => Ok(v.clone()),
            Some(ParamValue::Real(v)) if libm::trunc(*v) == *v && *v >= 0.0 => Ok(format!("{}", *v as u64)),
            Some(_) => Err(RuleError::InvalidParameter { name: name.to_string(), reason: "expected an element label".into() }),
            None => Ok(default.to_string()),
        }
    }

    fn get_sign(&self, name: &str) -> Result<f64, RuleError> {
        let v = self.get_real(name, Some(1.0))?;
        if v == 1.0 || v == -1.0 {
            Ok(v)
        } else {
            Err(RuleError::InvalidParameter { name: name.to_string(), reason: "must be +1 or -1".into() })
        }
    }
}

/// Numeric rule builder keyed by coefficient name.
struct Builder {
    graph: CayleyGraph,
    quintic: QuinticName,
    by_name: BTreeMap<String, MonomialDescriptor>,
    coefficients: BTreeMap<MonomialDescriptor, Complex64>,
}

impl Builder {
    fn new(case: CaseId) -> Self {
        let graph = case.graph();
        let quintic = case.quintic_name();
        let by_name = super::all_descriptors(graph.template().len(), false)
            .into_iter()
            .map(|d| (descriptor_name(&graph, &d, quintic), d))
            .collect();
        Builder { graph, quintic, by_name, coefficients: BTreeMap::new() }
    }

    fn add(&mut self, name: &str, c: Complex64) {
        let d = *self.by_name.get(name).unwrap_or_else(|| panic!("unknown coefficient {}", name));
        let v = self.coefficients.entry(d).or_insert(Complex64::new(0.0, 0.0));
        *v += c;
    }

    fn finish(self, number_preserving: bool) -> Result<LocalRule<Complex64>, RuleError> {
        let _ = self.quintic;
        LocalRule::new(self.graph, self.coefficients, number_preserving)
    }
}

fn label_of(graph: &CayleyGraph, name: &str, label: &str) -> Result<usize, RuleError> {
    let g = graph.group().element(label).map_err(|_| RuleError::InvalidParameter {
        name: name.to_string(),
        reason: format!("`{}` is not a neighbourhood element", label),
    })?;
    graph.template().iter().position(|&h| h == g).ok_or_else(|| RuleError::InvalidParameter {
        name: name.to_string(),
        reason: format!("`{}` is not a neighbourhood element", label),
    })
}

/// Modulus `-2·scale·cos(angle)`, rejecting positive cosines.
fn forced_modulus(scale: f64, angle: f64, what: &str) -> Result<f64, RuleError> {
    let c = libm::cos(angle);
    if c > PHASE_TOL {
        return Err(RuleError::ConstraintViolation(format!(
            "{} requires cos({:.6}) <= 0 so that its modulus -2|α|cos is nonnegative",
            what, angle
        )));
    }
    Ok((-2.0 * scale * c).max(0.0))
}

fn wrap(angle: f64) -> f64 {
    let t = libm::remainder(angle, 2.0 * PI);
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Builds the numeric rule of a solution family.
///
/// `ℤ₂×ℤ₂`:
/// * family 1 has no solution;
/// * family 2 (`alpha_site`, `theta`, `phi`): `α_x = e^{iθ}`,
///   `β_ix = β_jx = |β|e^{iφ}` with `|β| = -2cos(φ-θ)`, `γ_ijx = β²e^{-iθ}`;
/// * family 3 (`x`, `y`, `theta_x`, `theta_y`, `alpha_x_modulus`, `phi_yx`):
///   `θ_y - θ_x = ±π/2`, `φ_xy = θ_y - θ_x + φ_yx`,
///   `|β_ji| = -2|α_i|cos(θ_x - φ_yx)`.
///
/// `ℤ₅`:
/// * family 1 (`s1`, `s2`, `sigma1`, `sigma2`, `phi`): the Majorana shift
///   `ψ'_g = e^{iφ}/2·[σ₁(ψ+ψ†)_{g s1} + σ₂(ψ-ψ†)_{g s2}]`;
/// * family 2 (`omega0`, `phi`): `γ₀ = e^{iω₀}`, `η₁₀ = η₄₀ = |η|e^{iφ}` with
///   `|η| = -2cos(φ-ω₀)`, `ν = η²/γ₀`;
/// * family 3 (`theta0`, `phi`): `α₀ = e^{iθ₀}`, `β₁₀ = β₄₀ = |β|e^{iφ}` with
///   `|β| = -2cos(φ-θ₀)`, `μ = β²/α₀`.
pub fn family_rule(case: CaseId, family: u32, params: &FamilyParams) -> Result<LocalRule<Complex64>, RuleError> {
    let mut b = Builder::new(case);
    let graph = b.graph.clone();
    let label = |p: usize| graph.group().label(graph.template()[p]).to_string();
    match (case, family) {
        (CaseId::KleinFour, 1) => Err(RuleError::NoSolution { case: case.name(), family }),
        (CaseId::KleinFour, 2) => {
            let x = label_of(&graph, "alpha_site", &params.get_label("alpha_site", "e")?)?;
            let theta = params.get_real("theta", Some(0.0))?;
            let phi = params.get_real("phi", None)?;
            let modulus = forced_modulus(1.0, phi - theta, "beta")?;
            let alpha = Complex64::from_polar(1.0, theta);
            let beta = Complex64::from_polar(modulus, phi);
            let (i, j) = others(x);
            b.add(&format!("alpha_{}", label(x)), alpha);
            b.add(&format!("beta_{}{}", label(i), label(x)), beta);
            b.add(&format!("beta_{}{}", label(j), label(x)), beta);
            let k = 3;
            let rot: String = (1..=k).map(|s| label((x + s) % k)).collect();
            b.add(&format!("gamma_{}", rot), beta * beta / alpha);
            b.finish(true)
        }
        (CaseId::KleinFour, 3) => {
            let x = label_of(&graph, "x", &params.get_label("x", "a")?)?;
            let y = label_of(&graph, "y", &params.get_label("y", "b")?)?;
            if x == y {
                return Err(RuleError::InvalidParameter { name: "y".into(), reason: "must differ from x".into() });
            }
            let theta_x = params.get_real("theta_x", Some(0.0))?;
            let theta_y = params.get_real("theta_y", Some(theta_x + FRAC_PI_2))?;
            let r_x = params.get_real("alpha_x_modulus", Some(FRAC_1_SQRT_2))?;
            if !(r_x > 0.0 && r_x < 1.0) {
                return Err(RuleError::InvalidParameter {
                    name: "alpha_x_modulus".into(),
                    reason: "must lie strictly between 0 and 1".into(),
                });
            }
            let phi_yx = params.get_real("phi_yx", Some(PI))?;
            let dtheta = wrap(theta_y - theta_x);
            if (dtheta.abs() - FRAC_PI_2).abs() > PHASE_TOL {
                return Err(RuleError::ConstraintViolation(
                    "the linear sector requires Re(α_x α_y*) = 0, i.e. θ_y - θ_x = ±π/2".into(),
                ));
            }
            let r_y = libm::sqrt(1.0 - r_x * r_x);
            let phi_xy = theta_y - theta_x + phi_yx;
            let beta_yx = forced_modulus(r_x, theta_x - phi_yx, "beta_yx")?;
            let beta_xy = forced_modulus(r_y, theta_y - phi_xy, "beta_xy")?;
            b.add(&format!("alpha_{}", label(x)), Complex64::from_polar(r_x, theta_x));
            b.add(&format!("alpha_{}", label(y)), Complex64::from_polar(r_y, theta_y));
            b.add(&format!("beta_{}{}", label(y), label(x)), Complex64::from_polar(beta_yx, phi_yx));
            b.add(&format!("beta_{}{}", label(x), label(y)), Complex64::from_polar(beta_xy, phi_xy));
            b.finish(true)
        }
        (CaseId::Cyclic5, 1) => {
            let s1 = label_of(&graph, "s1", &params.get_label("s1", "0")?)?;
            let s2 = label_of(&graph, "s2", &params.get_label("s2", "0")?)?;
            let sigma1 = params.get_sign("sigma1")?;
            let sigma2 = params.get_sign("sigma2")?;
            let phase = Complex64::from_polar(0.5, params.get_real("phi", Some(0.0))?);
            b.add(&format!("alpha_{}", label(s1)), phase * sigma1);
            b.add(&format!("gamma_{}", label(s1)), phase * sigma1);
            b.add(&format!("alpha_{}", label(s2)), phase * sigma2);
            b.add(&format!("gamma_{}", label(s2)), -phase * sigma2);
            b.finish(false)
        }
        (CaseId::Cyclic5, 2) => {
            let omega = params.get_real("omega0", Some(0.0))?;
            let phi = params.get_real("phi", None)?;
            let modulus = forced_modulus(1.0, phi - omega, "eta")?;
            let gamma = Complex64::from_polar(1.0, omega);
            let eta = Complex64::from_polar(modulus, phi);
            b.add("gamma_0", gamma);
            b.add("eta_10", eta);
            b.add("eta_40", eta);
            b.add("nu_410", eta * eta / gamma);
            b.finish(false)
        }
        (CaseId::Cyclic5, 3) => {
            let theta = params.get_real("theta0", Some(0.0))?;
            let phi = params.get_real("phi", None)?;
            let modulus = forced_modulus(1.0, phi - theta, "beta")?;
            let alpha = Complex64::from_polar(1.0, theta);
            let beta = Complex64::from_polar(modulus, phi);
            b.add("alpha_0", alpha);
            b.add("beta_10", beta);
            b.add("beta_40", beta);
            b.add("mu_410", beta * beta / alpha);
            b.finish(false)
        }
        _ => Err(RuleError::UnknownFamily { case: case.name(), family }),
    }
}

/// The two template positions other than `x` (for three-element templates).
fn others(x: usize) -> (usize, usize) {
    match x {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Parameters `(omega0, phi)` of `ℤ₅` family 2 matching the flip of family 3
/// with parameters `(theta0, phi)`: `γ₀ = (α+β)²/α` and `η = -β(α+β)/α`.
pub fn matched_flip_parameters(theta0: f64, phi: f64) -> Result<FamilyParams, RuleError> {
    let alpha = Complex64::from_polar(1.0, theta0);
    let beta = Complex64::from_polar(forced_modulus(1.0, phi - theta0, "beta")?, phi);
    let gamma0 = (alpha + beta) * (alpha + beta) / alpha;
    let eta = -beta * (alpha + beta) / alpha;
    let eta_phase = if eta.norm() > 0.0 { eta.arg() } else { gamma0.arg() + PI };
    Ok(FamilyParams::new().real("omega0", gamma0.arg()).real("phi", eta_phase))
}
