//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every criterion is evaluated and
//! reported even when an earlier one fails. Exits non-zero if any is red.
//! `FCA_SEED` overrides the sampling seed.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use fca_core::constraints::{derive_constraints, linear_sector, verify_solution, ConstraintSystem, DeriveOptions};
use fca_core::discrimination::{analyze, relative_unitary, AnalysisOptions, AnalysisScope};
use fca_core::groups::{is_regular, BaseNeighborhood, QuotientSpec};
use fca_core::linalg::{max_abs, unitarity_residual, CMatrix};
use fca_core::matrixrep::{
    flip_operator, jordan_wigner, parity_leakage, sector_blocks, synthesize_unitary, synthesize_unitary_with,
    BasisOrdering, EvolutionMatrix, SynthesisMethod,
};
use fca_core::rules::{descriptor_name, family_rule, matched_flip_parameters, CaseId, FamilyParams, RuleError, SymbolicTemplate};
use fca_core::{Complex64, FermionPolynomial, LocalRule, MonomialDescriptor, MonomialKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Assignment = BTreeMap<String, Complex64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn seed() -> u64 {
    std::env::var("FCA_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x00FC_A5EED)
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Derived general systems, built once.
struct Systems {
    klein_np: (SymbolicTemplate, ConstraintSystem),
    klein: (SymbolicTemplate, ConstraintSystem),
    cyclic: (SymbolicTemplate, ConstraintSystem),
}

impl Systems {
    fn build() -> Self {
        let make = |t: SymbolicTemplate| {
            let s = derive_constraints(&t.rule, DeriveOptions::default());
            (t, s)
        };
        let k = CaseId::KleinFour;
        let z = CaseId::Cyclic5;
        Systems {
            klein_np: make(SymbolicTemplate::number_preserving(k.graph(), k.quintic_name()).unwrap()),
            klein: make(SymbolicTemplate::general(k.graph(), k.quintic_name()).unwrap()),
            cyclic: make(SymbolicTemplate::general(z.graph(), z.quintic_name()).unwrap()),
        }
    }

    fn for_case(&self, case: CaseId) -> &(SymbolicTemplate, ConstraintSystem) {
        match case {
            CaseId::KleinFour => &self.klein,
            CaseId::Cyclic5 => &self.cyclic,
        }
    }

    fn verify(&self, case: CaseId, rule: &LocalRule<Complex64>, tol: f64) -> (bool, f64) {
        let (t, s) = self.for_case(case);
        let a = t.assignment(rule).unwrap();
        let r = verify_solution(s, &a, tol).unwrap();
        (r.pass, r.max_residual)
    }
}

const FAMILIES: [(CaseId, u32); 5] =
    [(CaseId::KleinFour, 2), (CaseId::KleinFour, 3), (CaseId::Cyclic5, 1), (CaseId::Cyclic5, 2), (CaseId::Cyclic5, 3)];

const LABELS: [&str; 3] = ["a", "b", "e"];
const Z5_LABELS: [&str; 3] = ["1", "0", "4"];

/// A phase `φ` with `cos(φ - θ) < 0` bounded away from zero.
fn obtuse(rng: &mut ChaCha8Rng, theta: f64) -> f64 {
    theta + FRAC_PI_2 + PI * rng.gen_range(0.02..0.98)
}

fn random_params(rng: &mut ChaCha8Rng, case: CaseId, family: u32) -> FamilyParams {
    match (case, family) {
        (CaseId::KleinFour, 2) => {
            let theta = rng.gen_range(0.0..2.0 * PI);
            FamilyParams::new()
                .label("alpha_site", LABELS[rng.gen_range(0..3)])
                .real("theta", theta)
                .real("phi", obtuse(rng, theta))
        }
        (CaseId::KleinFour, 3) => {
            let x = rng.gen_range(0..3);
            let y = (x + rng.gen_range(1..3)) % 3;
            let tx = rng.gen_range(0.0..2.0 * PI);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            FamilyParams::new()
                .label("x", LABELS[x])
                .label("y", LABELS[y])
                .real("theta_x", tx)
                .real("theta_y", tx + sign * FRAC_PI_2)
                .real("alpha_x_modulus", rng.gen_range(0.05..0.95))
                .real("phi_yx", tx - obtuse(rng, 0.0))
        }
        (CaseId::Cyclic5, 1) => FamilyParams::new()
            .label("s1", Z5_LABELS[rng.gen_range(0..3)])
            .label("s2", Z5_LABELS[rng.gen_range(0..3)])
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
        _ => unreachable!(),
    }
}

fn coefficient(rule: &LocalRule<Complex64>, case: CaseId, name: &str) -> Complex64 {
    rule.coefficients()
        .iter()
        .find(|(d, _)| descriptor_name(rule.graph(), d, case.quintic_name()) == name)
        .map(|(_, c)| *c)
        .unwrap_or_default()
}

fn with_coefficients(rule: &LocalRule<Complex64>, coeffs: BTreeMap<MonomialDescriptor, Complex64>) -> LocalRule<Complex64> {
    LocalRule::new(rule.graph().clone(), coeffs, rule.is_number_preserving()).unwrap()
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn sector_ordering(n: usize) -> BasisOrdering {
    BasisOrdering::sector_ordered((0..n).map(|i| format!("s{}", i)).collect()).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> FermionPolynomial<Complex64> {
    let mask = (1u32 << n) - 1;
    let terms: Vec<(MonomialKey, Complex64)> = (0..rng.gen_range(1..=4))
        .map(|_| (MonomialKey::new(rng.gen::<u32>() & mask, rng.gen::<u32>() & mask), random_complex(rng)))
        .collect();
    FermionPolynomial::from_terms(n, terms).unwrap()
}

fn c1_car_oracle(_: &Systems) -> Outcome {
    let mut rng = rng(1);
    let orderings: Vec<BasisOrdering> = (1..=5).map(sector_ordering).collect();
    let mut worst = 0.0_f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=5);
        let o = &orderings[n - 1];
        let (p, q) = (random_poly(&mut rng, n), random_poly(&mut rng, n));
        let (jp, jq) = (jordan_wigner(&p, o).unwrap(), jordan_wigner(&q, o).unwrap());
        let prod = jordan_wigner(&p.multiply(&q).unwrap(), o).unwrap();
        let anti = jordan_wigner(&p.anticommute(&q).unwrap(), o).unwrap();
        let adj = jordan_wigner(&p.adjoint(), o).unwrap();
        worst = worst
            .max(max_abs(&(prod - &jp * &jq)))
            .max(max_abs(&(anti - (&jp * &jq + &jq * &jp))))
            .max(max_abs(&(adj - jp.adjoint())));
    }
    outcome(worst <= 1e-12, format!("500 pairs, N<=5, max deviation {:.2e}", worst))
}

fn c2_xi_exclusion(sys: &Systems) -> Outcome {
    let (t, s) = &sys.klein_np;
    let case = CaseId::KleinFour;
    let mut rng = rng(2);
    let check = |a: &Assignment| verify_solution(s, a, 1e-12).unwrap().pass;
    let (mut base_ok, mut null_rejected, mut opposite_rejected, mut nonzero_opposite_pass) = (0, 0, 0, 0);
    let draws = 20;
    for _ in 0..draws {
        let rule = family_rule(case, 3, &random_params(&mut rng, case, 3)).unwrap();
        let base = t.assignment(&rule).unwrap();
        if check(&base) {
            base_ok += 1;
        }
        let eps = Complex64::from_polar(rng.gen_range(1e-3..1.0), rng.gen_range(0.0..2.0 * PI));
        let mut a = base.clone();
        a.insert("xi_eab".into(), eps);
        if !check(&a) {
            null_rejected += 1;
        }
        let mut a = base.clone();
        a.insert("xi_abe".into(), eps);
        a.insert("xi_bea".into(), -eps + random_complex(&mut rng) * 0.5 + Complex64::new(1e-3, 0.0));
        if !check(&a) {
            opposite_rejected += 1;
        }
        let mut a = base.clone();
        a.insert("xi_abe".into(), eps);
        a.insert("xi_bea".into(), -eps);
        if check(&a) {
            nonzero_opposite_pass += 1;
        }
    }
    let pass = base_ok == draws && null_rejected == draws && opposite_rejected == draws;
    outcome(
        pass,
        format!(
            "family 3 with xi=0 passes {}/{}; xi_eab!=0 rejected {}/{}; xi_abe!=-xi_bea rejected {}/{}; \
             nonzero opposite pair passes {}/{} (the full system also forces xi=0)",
            base_ok, draws, null_rejected, draws, opposite_rejected, draws, nonzero_opposite_pass, draws
        ),
    )
}

fn c3_families(sys: &Systems) -> Outcome {
    let mut rng = rng(3);
    let mut lines = Vec::new();
    let mut pass = true;
    for (case, family) in FAMILIES {
        let (mut ok, mut worst, mut perturbed, mut caught) = (0, 0.0_f64, 0, 0);
        for _ in 0..100 {
            let rule = family_rule(case, family, &random_params(&mut rng, case, family)).unwrap();
            let (p, r) = sys.verify(case, &rule, 1e-12);
            ok += p as usize;
            worst = worst.max(r);
            for d in rule.coefficients().keys() {
                let mut coeffs = rule.coefficients().clone();
                *coeffs.get_mut(d).unwrap() += Complex64::from_polar(1e-3, rng.gen_range(0.0..2.0 * PI));
                let (p, _) = sys.verify(case, &with_coefficients(&rule, coeffs), 1e-12);
                perturbed += 1;
                caught += !p as usize;
            }
        }
        pass &= ok == 100 && caught == perturbed;
        lines.push(format!("{} f{}: {}/100 pass (max {:.1e}), {}/{} perturbations fail", case.name(), family, ok, worst, caught, perturbed));
    }
    let none = matches!(family_rule(CaseId::KleinFour, 1, &FamilyParams::new()), Err(RuleError::NoSolution { .. }));
    pass &= none;
    lines.push(format!("Z2xZ2 f1 -> NoSolution: {}", none));
    outcome(pass, lines.join("; "))
}

type Check = fn(&Systems) -> Outcome;

fn c4_qw_universality(sys: &Systems) -> Outcome {
    let mut rng = rng(4);
    let (mut checked, mut worst) = (0, 0.0_f64);
    let mut nonlinear_fail = true;
    for (case, family) in FAMILIES {
        for _ in 0..100 {
            let rule = family_rule(case, family, &random_params(&mut rng, case, family)).unwrap();
            if sys.verify(case, &rule, 1e-12).0 {
                checked += 1;
                worst = worst.max(linear_sector(&rule).residual);
            }
        }
        let rule = family_rule(case, family, &random_params(&mut rng, case, family)).unwrap();
        let stripped: BTreeMap<_, _> = rule.coefficients().iter().filter(|(d, _)| !d.is_linear()).map(|(d, c)| (*d, *c)).collect();
        if !stripped.is_empty() {
            let r = with_coefficients(&rule, stripped);
            nonlinear_fail &= !sys.verify(case, &r, 1e-12).0 && (linear_sector(&r).residual - 1.0).abs() < 1e-12;
        }
    }
    outcome(
        worst <= 1e-10 && nonlinear_fail && checked == 500,
        format!("{} passing rules, max Bogoliubov residual {:.2e}; zero-linear-sector rules rejected: {}", checked, worst, nonlinear_fail),
    )
}

fn conjugation_error(rule: &LocalRule<Complex64>, u: &EvolutionMatrix) -> f64 {
    let n = rule.site_count();
    let mut worst = 0.0_f64;
    for (j, evolved) in rule.evolved_operators().iter().enumerate() {
        let m = jordan_wigner(&FermionPolynomial::<Complex64>::annihilator(n, j).unwrap(), &u.ordering).unwrap();
        let mp = jordan_wigner(evolved, &u.ordering).unwrap();
        worst = worst.max(max_abs(&(&u.matrix * m * u.matrix.adjoint() - mp)));
    }
    worst
}

/// `min_φ ‖A - e^{iφ}B‖_F`.
fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let inner: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    (a - b * phase).norm()
}

fn c5_synthesis(_: &Systems) -> Outcome {
    let mut rng = rng(5);
    let (mut count, mut unitarity, mut fidelity, mut stacked_gap) = (0, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut failures = Vec::new();
    for (case, family) in FAMILIES {
        let o = BasisOrdering::for_case(case);
        for k in 0..5 {
            let rule = family_rule(case, family, &random_params(&mut rng, case, family)).unwrap();
            match synthesize_unitary(&rule, &o) {
                Ok(u) => {
                    count += 1;
                    unitarity = unitarity.max(unitarity_residual(&u.matrix));
                    fidelity = fidelity.max(conjugation_error(&rule, &u));
                    if case == CaseId::KleinFour && k == 0 {
                        match synthesize_unitary_with(&rule, &o, SynthesisMethod::StackedSvd) {
                            Ok(s) => stacked_gap = stacked_gap.max(phase_distance(&s.matrix, &u.matrix)),
                            Err(e) => failures.push(format!("{} f{} stacked: {}", case.name(), family, e)),
                        }
                    }
                }
                Err(e) => failures.push(format!("{} f{}: {}", case.name(), family, e)),
            }
        }
    }
    let pass = failures.is_empty() && unitarity <= 1e-10 && fidelity <= 1e-10 && stacked_gap <= 1e-9;
    outcome(
        pass,
        format!(
            "{} rules with one-dimensional null space; max |U†U-I| {:.2e}; max |UJU†-J'| {:.2e}; \
             stacked-SVD agreement {:.2e}{}",
            count,
            unitarity,
            fidelity,
            stacked_gap,
            if failures.is_empty() { String::new() } else { format!("; errors: {}", failures.join(", ")) }
        ),
    )
}

fn diag_error(m: &CMatrix, expected: &[Complex64]) -> f64 {
    let e = CMatrix::from_diagonal(&fca_core::linalg::CVector::from_vec(expected.to_vec()));
    max_abs(&(m - e))
}

fn c6_sector_blocks(_: &Systems) -> Outcome {
    let case = CaseId::KleinFour;
    let o = BasisOrdering::for_case(case);
    let one = Complex64::new(1.0, 0.0);
    let rule = family_rule(case, 2, &FamilyParams::new().label("alpha_site", "e").real("phi", PI)).unwrap();
    let u = synthesize_unitary(&rule, &o).unwrap();
    let b = sector_blocks(&u, case).unwrap();
    let z = coefficient(&rule, case, "alpha_e")
        + coefficient(&rule, case, "beta_ae")
        + coefficient(&rule, case, "beta_be")
        + coefficient(&rule, case, "gamma_abe");
    let errs = [
        diag_error(&b.blocks["S"], &[one; 4]),
        diag_error(&b.blocks["T"], &[z; 4]),
        diag_error(&b.blocks["A"], &[one, -one, -one]),
        max_abs(&b.blocks["B"]),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);

    // Conjugation of the printed T entry at a generic point (θ_x = 0 as in the table).
    let generic = family_rule(case, 2, &FamilyParams::new().label("alpha_site", "e").real("phi", PI + 0.2)).unwrap();
    let ug = synthesize_unitary(&generic, &o).unwrap();
    let bg = sector_blocks(&ug, case).unwrap();
    let zg = coefficient(&generic, case, "alpha_e")
        + coefficient(&generic, case, "beta_ae")
        + coefficient(&generic, case, "beta_be")
        + coefficient(&generic, case, "gamma_abe");
    let alpha = coefficient(&generic, case, "alpha_e");
    let t_plain = diag_error(&bg.blocks["T"], &[zg; 4]);
    let t_conj = diag_error(&bg.blocks["T"], &[zg.conj(); 4]);
    let s_conj = diag_error(&bg.blocks["S"], &[alpha.conj(); 4]);
    outcome(
        worst <= 1e-10,
        format!(
            "z = {:.3}; |S-I|, |T-zI|, |A-diag(1,-1,-1)|, |B| = {:.1e}, {:.1e}, {:.1e}, {:.1e}; \
             generic point: S=α*I err {:.1e}, T=zI err {:.2}, T=z*I err {:.1e} (printed T is unconjugated)",
            z, errs[0], errs[1], errs[2], errs[3], s_conj, t_plain, t_conj
        ),
    )
}

fn c7_cyclic_blocks(_: &Systems) -> Outcome {
    let case = CaseId::Cyclic5;
    let o = BasisOrdering::for_case(case);
    let mut rng = rng(7);
    let mut lines = Vec::new();
    let mut pass = true;
    for _ in 0..3 {
        let rule = family_rule(case, 3, &random_params(&mut rng, case, 3)).unwrap();
        let u = synthesize_unitary(&rule, &o).unwrap();
        let (a0, beta, mu) = (coefficient(&rule, case, "alpha_0"), coefficient(&rule, case, "beta_10"), coefficient(&rule, case, "mu_410"));
        let s = a0 + beta * 2.0 + mu;
        let expected_b: Vec<Complex64> = (0..10).map(|i| if i < 5 { (a0 + beta) * s } else { s * s }).collect();
        let mut per_gauge = Vec::new();
        for (gauge, phase) in [("vacuum", Complex64::new(1.0, 0.0)), ("full", u.entry(32, 32).conj())] {
            let mut m = u.clone();
            m.matrix *= phase;
            let b = sector_blocks(&m, case).unwrap();
            let errs = [
                diag_error(&b.blocks["A"], &[a0.conj(); 5]),
                diag_error(&b.blocks["D"], &[a0.conj() * a0.conj(); 10]),
                diag_error(&b.blocks["C"], &[s; 5]),
                diag_error(&b.blocks["B"], &expected_b),
            ];
            per_gauge.push((gauge, errs));
        }
        let consistent = per_gauge.iter().any(|(_, e)| e.iter().all(|&x| x <= 1e-10));
        pass &= consistent;
        lines.push(
            per_gauge
                .iter()
                .map(|(g, e)| format!("{} gauge A/D/C/B err {:.1e}/{:.1e}/{:.1e}/{:.1e}", g, e[0], e[1], e[2], e[3]))
                .collect::<Vec<_>>()
                .join(", "),
        );
    }
    // D on adjacent pairs follows α₀*(α₀*+β*), not (α₀*)².
    let rule = family_rule(case, 3, &FamilyParams::new().real("theta0", 0.4).real("phi", PI - 0.2)).unwrap();
    let u = synthesize_unitary(&rule, &o).unwrap();
    let (a0, beta) = (coefficient(&rule, case, "alpha_0"), coefficient(&rule, case, "beta_10"));
    let mut adjacent = 0.0_f64;
    let mut distant = 0.0_f64;
    for i in 2..=11 {
        let bits = o.state(i - 1);
        let sites: Vec<usize> = (0..5).filter(|k| bits >> k & 1 == 1).collect();
        let (x, y) = (o.sites()[sites[0]].parse::<i32>().unwrap(), o.sites()[sites[1]].parse::<i32>().unwrap());
        let near = (x - y).rem_euclid(5) == 1 || (y - x).rem_euclid(5) == 1;
        if near {
            adjacent = adjacent.max((u.entry(i, i) - a0.conj() * (a0.conj() + beta.conj())).norm());
        } else {
            distant = distant.max((u.entry(i, i) - a0.conj() * a0.conj()).norm());
        }
    }
    lines.push(format!("D: distant pairs match (α₀*)² to {:.1e}; adjacent pairs match α₀*(α₀*+β*) to {:.1e}", distant, adjacent));
    outcome(pass, lines.join("; "))
}

fn c8_flip(_: &Systems) -> Outcome {
    let case = CaseId::Cyclic5;
    let o = BasisOrdering::for_case(case);
    let f = flip_operator(&o).unwrap();
    let mut rng = rng(8);
    let mut worst = 0.0_f64;
    let (mut index_rel, mut reversed_abs) = (0.0_f64, 0.0_f64);
    for _ in 0..3 {
        let theta = rng.gen_range(0.0..2.0 * PI);
        let phi = obtuse(&mut rng, theta);
        let np = family_rule(case, 3, &FamilyParams::new().real("theta0", theta).real("phi", phi)).unwrap();
        let nnp = family_rule(case, 2, &matched_flip_parameters(theta, phi).unwrap()).unwrap();
        let u_np = synthesize_unitary(&np, &o).unwrap();
        let u_nnp = synthesize_unitary(&nnp, &o).unwrap();
        let fu = &f * &u_np.matrix;
        worst = worst.max(phase_distance(&u_nnp.matrix, &fu));
        // Literal N_ij = M_{32-i,j} (1-based), up to a global phase.
        let shifted = CMatrix::from_fn(32, 32, |r, c| if r + 1 < 32 { u_np.matrix[(32 - (r + 1) - 1, c)] } else { Complex64::new(0.0, 0.0) });
        index_rel = index_rel.max(phase_distance(&u_nnp.matrix, &shifted));
        // Row reversal i -> 33-i, compared in modulus only.
        for r in 0..32 {
            for c in 0..32 {
                reversed_abs = reversed_abs.max((u_nnp.matrix[(r, c)].norm() - u_np.matrix[(31 - r, c)].norm()).abs());
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("min over phase ‖U_nnp - e^(iφ) F U_np‖_F = {:.2e}; literal index relation N_ij = M_(32-i),j is off by {:.2}; |N_ij| = |M_(33-i),j| off by {:.1e}", worst, index_rel, reversed_abs),
    )
}

fn two_particle() -> AnalysisOptions {
    AnalysisOptions { scope: AnalysisScope::ParticleNumbers(vec![2]), parity_restricted: false }
}

/// Max over the points of `a` of the distance to the nearest point of `b`,
/// symmetrised.
fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |x: &[Complex64], y: &[Complex64]| {
        x.iter().map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

fn c9_relative_spectra(_: &Systems) -> Outcome {
    let case = CaseId::KleinFour;
    let o = BasisOrdering::for_case(case);
    let mut rng = rng(9);
    let one = Complex64::new(1.0, 0.0);
    let (mut single_lit, mut single_conj) = (0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let site = LABELS[rng.gen_range(0..3)];
        let rule = family_rule(case, 2, &FamilyParams::new().label("alpha_site", site).real("phi", obtuse(&mut rng, 0.0))).unwrap();
        let beta = rule.coefficients().iter().find(|(d, _)| !d.is_linear() && d.degree() == 3).map(|(_, c)| *c).unwrap();
        let u1 = synthesize_unitary(&rule, &o).unwrap();
        let u0 = synthesize_unitary(&rule.linearized(), &o).unwrap();
        let ev = analyze(&relative_unitary(&u0, &u1).unwrap(), &two_particle()).unwrap().distinct_eigenvalues();
        single_lit = single_lit.max(set_distance(&ev, &[one, one + beta]));
        single_conj = single_conj.max(set_distance(&ev, &[one, one + beta.conj()]));
    }
    let (mut lambda_lit, mut lambda_fixed, mut lambda_mod) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let p = random_params(&mut rng, case, 3);
        let rule = family_rule(case, 3, &p).unwrap();
        let label = |k: &str| match p.0.get(k) {
            Some(fca_core::rules::ParamValue::Label(l)) => l.clone(),
            _ => unreachable!(),
        };
        let (x, y) = (label("x"), label("y"));
        let ax = coefficient(&rule, case, &format!("alpha_{}", x)).conj();
        let ay = coefficient(&rule, case, &format!("alpha_{}", y)).conj();
        let bxy = coefficient(&rule, case, &format!("beta_{}{}", x, y)).conj();
        let byx = coefficient(&rule, case, &format!("beta_{}{}", y, x)).conj();
        let s = ax * ax + ay * ay;
        let printed = s * (s + byx * ax + bxy * ay);
        let d0 = ax * ax - ay * ay;
        let d1 = ax * (ax + byx) - ay * (ay + bxy);
        let u1 = synthesize_unitary(&rule, &o).unwrap();
        let u0 = synthesize_unitary(&rule.linearized(), &o).unwrap();
        let ev = analyze(&relative_unitary(&u0, &u1).unwrap(), &two_particle()).unwrap().distinct_eigenvalues();
        lambda_lit = lambda_lit.max(set_distance(&ev, &[one, printed]));
        lambda_fixed = lambda_fixed.max(set_distance(&ev, &[one, d0.conj() * d1]));
        lambda_mod = lambda_mod.max((printed.norm() - 1.0).abs());
    }
    let rule = family_rule(case, 2, &FamilyParams::new().label("alpha_site", "e").real("phi", PI)).unwrap();
    let u1 = synthesize_unitary(&rule, &o).unwrap();
    let u0 = synthesize_unitary(&rule.linearized(), &o).unwrap();
    let rep = analyze(&relative_unitary(&u0, &u1).unwrap(), &AnalysisOptions::default()).unwrap();
    let perfect = rep.perfectly_discriminable && rep.hull_distance_full <= 1e-10 && (rep.sine_p_succ - 1.0).abs() <= 1e-10;
    let pass = single_lit <= 1e-10 && lambda_lit <= 1e-10 && perfect;
    outcome(
        pass,
        format!(
            "single-α: vs {{1,1+β}} {:.1e}, vs {{1,1+β*}} {:.1e}; two-α: vs printed λ {:.2} (printed |λ| deviates from 1 by up to {:.2}), \
             vs conj(D0)·D1 {:.1e}; β=-2: perfect {}, hull {:.1e}, p_succ {:.12}",
            single_lit, single_conj, lambda_lit, lambda_mod, lambda_fixed, rep.perfectly_discriminable, rep.hull_distance_full, rep.sine_p_succ
        ),
    )
}

fn c10_regularity(_: &Systems) -> Outcome {
    let nb = BaseNeighborhood::Offsets(vec![0, 1, -1]);
    let results: Vec<(usize, bool)> =
        (2..=12usize).map(|n| (n, is_regular(&nb, &QuotientSpec::Integers { modulus: n }).unwrap())).collect();
    let pass = results.iter().all(|&(n, r)| r == (n >= 5));
    let shown: Vec<String> = results.iter().map(|(n, r)| format!("{}:{}", n, if *r { "T" } else { "F" })).collect();
    outcome(pass, format!("Z_n regular: {}", shown.join(" ")))
}

fn c11_vacuum_parity(_: &Systems) -> Outcome {
    let mut rng = rng(11);
    let (mut vac, mut full, mut leak) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut count = 0;
    for (case, family) in [(CaseId::KleinFour, 2), (CaseId::KleinFour, 3), (CaseId::Cyclic5, 3)] {
        let o = BasisOrdering::for_case(case);
        for _ in 0..5 {
            let rule = family_rule(case, family, &random_params(&mut rng, case, family)).unwrap();
            let u = synthesize_unitary(&rule, &o).unwrap();
            let (v, f) = (o.vacuum_position(), o.full_position());
            let col = |k: usize| -> f64 {
                let phase = u.matrix[(k, k)].norm();
                let off: f64 = (0..o.dim()).filter(|&r| r != k).map(|r| u.matrix[(r, k)].norm_sqr()).sum();
                (1.0 - phase).abs().max(off.sqrt())
            };
            vac = vac.max(col(v)).max((u.matrix[(v, v)] - 1.0).norm());
            full = full.max(col(f));
            leak = leak.max(parity_leakage(&u.matrix, &o).0);
            count += 1;
        }
    }
    outcome(
        vac <= 1e-10 && full <= 1e-10 && leak <= 1e-12,
        format!("{} number-preserving unitaries: vacuum dev {:.1e}, |1..1> dev {:.1e}, even/odd leakage {:.1e}", count, vac, full, leak),
    )
}

fn c12_isotropy(sys: &Systems) -> Outcome {
    let (t, s) = &sys.klein_np;
    let case = CaseId::KleinFour;
    let mut rng = rng(12);
    // Orbits of the a <-> b swap on template positions (a, b, e).
    let swap = |d: &MonomialDescriptor| {
        let sw = |m: u32| (m & 0b100) | ((m & 1) << 1) | ((m >> 1) & 1);
        MonomialDescriptor::new(sw(d.s), sw(d.t), 3).unwrap()
    };
    let descriptors: Vec<MonomialDescriptor> = t.names.keys().copied().collect();
    let mut violations = 0;
    let mut sampled_pass = 0;
    for _ in 0..1000 {
        let mut values: BTreeMap<MonomialDescriptor, Complex64> = BTreeMap::new();
        for d in &descriptors {
            if values.contains_key(d) {
                continue;
            }
            let v = if rng.gen_bool(0.5) { random_complex(&mut rng) } else { Complex64::new(0.0, 0.0) };
            values.insert(*d, v);
            values.insert(swap(d), v);
        }
        let a: Assignment = t.names.iter().map(|(d, n)| (n.clone(), values[d])).collect();
        if verify_solution(s, &a, 1e-12).unwrap().pass {
            sampled_pass += 1;
            if values.iter().any(|(d, v)| !d.is_linear() && v.norm() > 0.0) {
                violations += 1;
            }
        }
    }
    // Family points fixed by the swap: family 2 centred at e.
    let mut family_violations = Vec::new();
    for k in 0..20 {
        let phi = PI / 2.0 + PI * (k as f64 + 0.5) / 20.0;
        let rule = family_rule(case, 2, &FamilyParams::new().label("alpha_site", "e").real("phi", phi)).unwrap();
        let symmetric = rule.coefficients().iter().all(|(d, c)| (rule.coefficient(&swap(d)) - c).norm() < 1e-15);
        let a = t.assignment(&rule).unwrap();
        let passes = verify_solution(s, &a, 1e-12).unwrap().pass;
        let nonlinear = rule.coefficients().iter().any(|(d, c)| !d.is_linear() && c.norm() > 1e-9);
        if symmetric && passes && nonlinear {
            family_violations.push(phi);
        }
    }
    let pass = violations == 0 && family_violations.is_empty();
    outcome(
        pass,
        format!(
            "random symmetric samples: {} pass, {} with nonlinear terms; symmetric family-2 points (x=e) passing with β≠0: {}/20 (e.g. φ={:.3})",
            sampled_pass,
            violations,
            family_violations.len(),
            family_violations.first().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn main() {
    let start = Instant::now();
    let systems = Systems::build();
    println!(
        "derived systems: Z2xZ2 np {} eqs, Z2xZ2 general {} eqs, Z5 general {} eqs ({:.1} s); seed {}",
        systems.klein_np.1.len(),
        systems.klein.1.len(),
        systems.cyclic.1.len(),
        start.elapsed().as_secs_f64(),
        seed()
    );
    let criteria: [(&str, Check); 12] = [
        ("CAR engine oracle equivalence", c1_car_oracle),
        ("xi-exclusion", c2_xi_exclusion),
        ("family verification", c3_families),
        ("QW universality", c4_qw_universality),
        ("unitary synthesis", c5_synthesis),
        ("sector blocks", c6_sector_blocks),
        ("Z5 sector formulas", c7_cyclic_blocks),
        ("flip relation", c8_flip),
        ("relative spectra", c9_relative_spectra),
        ("wrapping-lemma regularity", c10_regularity),
        ("vacuum/parity invariants", c11_vacuum_parity),
        ("isotropy collapse", c12_isotropy),
    ];
    let mut red = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check(&systems);
        println!(
            "criterion {:>2} {} {} [{:.2} s]: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            t.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            red.push(k + 1);
        }
    }
    println!("{} of 12 criteria pass", 12 - red.len());
    if !red.is_empty() {
        println!("failing: {:?}", red);
        std::process::exit(1);
    }
}
