//! Random parameter draws for the solution families.

use std::f64::consts::{FRAC_PI_2, PI};

use fca_core::rules::{CaseId, FamilyParams};
use rand::Rng;

const KLEIN_LABELS: [&str; 3] = ["a", "b", "e"];
const CYCLIC_LABELS: [&str; 3] = ["1", "0", "4"];

/// Seed from `FCA_SEED`, defaulting to zero.
pub fn seed_from_env() -> Result<u64, String> {
    match std::env::var("FCA_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| format!("FCA_SEED must be an unsigned integer, got `{}`", s)),
        Err(_) => Ok(0),
    }
}

/// A phase `φ` with `cos(φ - θ)` negative and bounded away from zero.
fn obtuse<G: Rng>(rng: &mut G, theta: f64) -> f64 {
    theta + FRAC_PI_2 + PI * rng.gen_range(0.02..0.98)
}

/// Draws admissible parameters; `None` for families without parameters or
/// without solutions.
pub fn sample_params<G: Rng>(rng: &mut G, case: CaseId, family: u32) -> Option<FamilyParams> {
    let p = match (case, family) {
        (CaseId::KleinFour, 2) => {
            let theta = rng.gen_range(0.0..2.0 * PI);
            FamilyParams::new()
                .label("alpha_site", KLEIN_LABELS[rng.gen_range(0..3)])
                .real("theta", theta)
                .real("phi", obtuse(rng, theta))
        }
        (CaseId::KleinFour, 3) => {
            let x = rng.gen_range(0..3);
            let y = (x + rng.gen_range(1..3)) % 3;
            let tx = rng.gen_range(0.0..2.0 * PI);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            FamilyParams::new()
                .label("x", KLEIN_LABELS[x])
                .label("y", KLEIN_LABELS[y])
                .real("theta_x", tx)
                .real("theta_y", tx + sign * FRAC_PI_2)
                .real("alpha_x_modulus", rng.gen_range(0.05..0.95))
                .real("phi_yx", tx - obtuse(rng, 0.0))
        }
        (CaseId::Cyclic5, 1) => FamilyParams::new()
            .label("s1", CYCLIC_LABELS[rng.gen_range(0..3)])
            .label("s2", CYCLIC_LABELS[rng.gen_range(0..3)])
            .real("sigma1", if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .real("sigma2", if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .real("phi", rng.gen_range(0.0..2.0 * PI)),
        (CaseId::Cyclic5, 2) => {
            let omega = rng.gen_range(0.0..2.0 * PI);
            FamilyParams::new().real("omega0", omega).real("phi", obtuse(rng, omega))
        }
        (CaseId::Cyclic5, 3) => {
            let theta = rng.gen_range(0.0..2.0 * PI);
            FamilyParams::new().real("theta0", theta).real("phi", obtuse(rng, theta))
        }
        _ => return None,
    };
    Some(p)
}
