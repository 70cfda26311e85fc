//! End-to-end checks: derivation, verification, synthesis and discrimination
//! on small fixed examples.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use fca_core::constraints::{derive_constraints, verify_solution, BracketKind, DeriveOptions};
use fca_core::discrimination::{analyze, relative_unitary, AnalysisOptions, AnalysisScope};
use fca_core::groups::{is_regular, BaseNeighborhood, GroupError, QuotientSpec};
use fca_core::matrixrep::{synthesize_unitary, BasisOrdering};
use fca_core::rings::Monomial;
use fca_core::rules::{family_rule, matched_flip_parameters, CaseId, FamilyParams};
use fca_core::rules::{MonomialDescriptor, SymbolicTemplate};
use fca_core::{CoefficientRing, Complex64, Element, FiniteGroup, GaussianRational, LocalRule, SymPoly, Variable};

fn identity_position(case: CaseId) -> usize {
    let g = case.graph();
    g.template().iter().position(|&h| h == Element::IDENTITY).unwrap()
}

fn system(case: CaseId, np: bool) -> (SymbolicTemplate, fca_core::constraints::ConstraintSystem) {
    let g = case.graph();
    let t = if np {
        SymbolicTemplate::number_preserving(g, case.quintic_name())
    } else {
        SymbolicTemplate::general(g, case.quintic_name())
    }
    .unwrap();
    let s = derive_constraints(&t.rule, DeriveOptions::default());
    (t, s)
}

#[test]
fn identity_shape_rule_derives_normalization_only() {
    for case in [CaseId::KleinFour, CaseId::Cyclic5] {
        let d = MonomialDescriptor::annihilator(identity_position(case));
        let t = SymbolicTemplate::from_descriptors(case.graph(), &[d], true, case.quintic_name()).unwrap();
        let s = derive_constraints(&t.rule, DeriveOptions::default());
        assert_eq!(s.len(), 1, "{}", case.name());
        let alpha = SymPoly::variable(&t.names[&d]);
        assert_eq!(s.equations[0].lhs, alpha.mul(&alpha.conj()));
        assert_eq!(s.equations[0].rhs, 1);
    }
}

#[test]
fn derived_systems_are_bihomogeneous() {
    for (case, np) in [(CaseId::KleinFour, true), (CaseId::KleinFour, false), (CaseId::Cyclic5, false)] {
        let (_, s) = system(case, np);
        assert!(!s.is_empty());
        for eq in &s.equations {
            // Pair brackets are bilinear in the coefficients, dagger brackets
            // are sesquilinear.
            let plain = match eq.provenance.bracket {
                BracketKind::Pair => 2,
                BracketKind::PairDagger => 1,
            };
            for (m, _) in eq.lhs.terms() {
                let conj = m.variables().iter().filter(|v| v.conjugated).count();
                assert_eq!((m.degree() - conj, conj), (plain, 2 - plain), "{:?}", eq.provenance);
            }
            if np {
                // Each evolved field removes one particle.
                let k = eq.provenance.monomial;
                let surplus = if plain == 2 { 2 } else { 0 };
                assert_eq!(k.annihilator_count(), k.creator_count() + surplus);
            }
        }
    }
}

#[test]
fn normalization_and_closure_examples() {
    let case = CaseId::KleinFour;
    let (t, s) = system(case, true);
    let zero: BTreeMap<String, Complex64> = t.names.values().map(|n| (n.clone(), Complex64::new(0.0, 0.0))).collect();
    let r = verify_solution(&s, &zero, 1e-10).unwrap();
    assert!(!r.pass);
    assert!((r.max_residual - 1.0).abs() < 1e-15);

    let p = FamilyParams::new().label("alpha_site", "a").real("theta", 0.0).real("phi", PI);
    let rule = family_rule(case, 2, &p).unwrap();
    let mut a = t.assignment(&rule).unwrap();
    assert!(verify_solution(&s, &a, 1e-10).unwrap().pass);
    let gamma = a.keys().find(|k| k.starts_with("gamma") && a[*k].norm() > 0.5).cloned().unwrap();
    a.insert(gamma, Complex64::new(3.9, 0.0));
    assert!(!verify_solution(&s, &a, 1e-10).unwrap().pass);
}

#[test]
fn cyclic_flip_maps_family_three_to_family_two() {
    for (theta0, phi) in [(0.3, PI + 0.1), (1.7, 1.7 + 2.0), (5.0, 5.0 + PI)] {
        let three = family_rule(CaseId::Cyclic5, 3, &FamilyParams::new().real("theta0", theta0).real("phi", phi)).unwrap();
        let two = family_rule(CaseId::Cyclic5, 2, &matched_flip_parameters(theta0, phi).unwrap()).unwrap();
        let flipped = three.flipped().unwrap();
        for d in flipped.coefficients().keys().chain(two.coefficients().keys()) {
            assert!((flipped.coefficient(d) - two.coefficient(d)).norm() < 1e-12, "{:?}", d);
        }
    }
}

#[test]
fn theta_is_tied_to_beta_and_chi() {
    let (_, s) = system(CaseId::Cyclic5, false);
    let v = |n: &str| SymPoly::variable(n);
    assert!(s.contains_multiple_of(&v("beta_10").mul(&v("theta"))));
    assert!(s.contains_multiple_of(&v("mu_410").mul(&v("theta"))));
    let chi = v("chi_041").conj().mul(&v("chi_104"));
    let theta_sq = v("theta").mul(&v("theta").conj());
    assert!(s.contains_multiple_of(&chi.sub(&theta_sq)));
}

#[test]
fn family_two_and_three_variables_force_mu_nu() {
    // Restricted to the variables of the two flip-related families, with the
    // linear-flavoured terms switched off, only μ ν = 0 survives.
    let (t, s) = system(CaseId::Cyclic5, false);
    let keep = ["alpha_0", "gamma_0", "beta_10", "beta_40", "eta_10", "eta_40", "mu_410", "nu_410"];
    let mut reduced = s.clone();
    for name in t.names.values().filter(|n| !keep.contains(&n.as_str())) {
        reduced = reduced.substitute(name, &SymPoly::zero());
    }
    for name in ["beta_10", "beta_40", "eta_10", "eta_40"] {
        reduced = reduced.substitute(name, &SymPoly::zero());
    }
    let mu = SymPoly::variable("mu_410");
    let nu = SymPoly::variable("nu_410");
    assert!(reduced.contains_multiple_of(&mu.mul(&nu)) || reduced.contains_multiple_of(&mu.conj().mul(&nu.conj())));
}

#[test]
fn parity_restricted_hulls_dominate_full() {
    let case = CaseId::KleinFour;
    let o = BasisOrdering::for_case(case);
    for (theta, phi) in [(0.0, PI + 0.2), (0.4, 2.9), (2.0, 4.5)] {
        let p = FamilyParams::new().label("alpha_site", "b").real("theta", theta).real("phi", phi);
        let rule = family_rule(case, 2, &p).unwrap();
        let u1 = synthesize_unitary(&rule, &o).unwrap();
        let u0 = synthesize_unitary(&rule.linearized(), &o).unwrap();
        let v = relative_unitary(&u0, &u1).unwrap();
        for scope in [AnalysisScope::Full, AnalysisScope::ParticleNumbers(vec![2])] {
            let r = analyze(&v, &AnalysisOptions { scope, parity_restricted: false }).unwrap();
            for h in [r.hull_distance_even, r.hull_distance_odd].into_iter().flatten() {
                assert!(h >= r.hull_distance_full - 1e-12);
            }
            assert!((0.5..=1.0 + 1e-12).contains(&r.standard_p_opt));
        }
    }
}

#[test]
fn linear_rules_are_indistinguishable_from_themselves() {
    let case = CaseId::Cyclic5;
    let o = BasisOrdering::for_case(case);
    let p = FamilyParams::new().label("s1", "0").label("s2", "1").real("sigma1", 1.0).real("sigma2", -1.0).real("phi", 0.4);
    let rule: LocalRule<Complex64> = family_rule(case, 1, &p).unwrap();
    let u = synthesize_unitary(&rule, &o).unwrap();
    let r = analyze(&relative_unitary(&u, &u).unwrap(), &AnalysisOptions::default()).unwrap();
    assert_eq!(r.distinct_eigenvalues().len(), 1);
    assert!(!r.perfectly_discriminable);
    assert!((r.standard_p_opt - 0.5).abs() < 1e-12);
}

fn symmetric_group_three() -> FiniteGroup {
    let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let table: Vec<Vec<usize>> =
        perms.iter().map(|p| perms.iter().map(|q| index([p[q[0]], p[q[1]], p[q[2]]])).collect()).collect();
    FiniteGroup::from_table(&table, None).unwrap()
}

#[test]
fn regularity_on_finite_quotients() {
    let s3 = symmetric_group_three();
    let template = vec![Element(0), Element(1), Element(2)];
    let not_normal = QuotientSpec::Finite { base: s3.clone(), kernel: vec![Element(0), Element(1)] };
    assert_eq!(is_regular(&BaseNeighborhood::Template(template.clone()), &not_normal), Err(GroupError::KernelNotNormal));
    let alternating = QuotientSpec::Finite { base: s3.clone(), kernel: vec![Element(0), Element(4), Element(5)] };
    assert!(is_regular(&BaseNeighborhood::Template(template.clone()), &alternating).is_ok());
    let trivial = QuotientSpec::Finite { base: s3, kernel: vec![Element(0)] };
    assert_eq!(is_regular(&BaseNeighborhood::Template(template), &trivial), Ok(true));

    let z = BaseNeighborhood::Offsets(vec![-1, 0, 1]);
    assert_eq!(is_regular(&z, &QuotientSpec::Integers { modulus: 5 }), Ok(true));
    assert_eq!(is_regular(&z, &QuotientSpec::Integers { modulus: 3 }), Ok(false));
}

#[test]
fn symbolic_conjugation_round_trip() {
    let m = Monomial::new(vec![Variable::new("alpha_a"), Variable::new("alpha_a").conjugate()]);
    let p = SymPoly::monomial(m, GaussianRational::from_integer(2));
    assert_eq!(p.conj(), p);
}
