//! Local update rules: a coefficient table over monomial descriptors relative
//! to the ordered neighbourhood template, applied homogeneously by group
//! translation.

mod families;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub use families::{family_rule, matched_flip_parameters, CaseId, FamilyParams, ParamValue};

use crate::algebra::{normal_order, AlgebraError, CoefficientRing, FermionPolynomial, FieldOp};
use crate::groups::{CayleyGraph, Element, GroupError};
use crate::rings::SymPoly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("descriptor has no operators")]
    EmptyDescriptor,
    #[error("descriptor {0:?} has even degree")]
    EvenDegree(MonomialDescriptor),
    #[error("descriptor {0:?} references a position outside the template")]
    PositionOutOfRange(MonomialDescriptor),
    #[error("descriptor {0:?} is not number preserving")]
    NotNumberPreserving(MonomialDescriptor),
    #[error("site {0} of the polynomial lies outside the neighbourhood of the identity")]
    OutsideNeighborhood(usize),
    #[error("no solution exists for family {family} of case {case}")]
    NoSolution { case: &'static str, family: u32 },
    #[error("unknown family {family} for case {case}")]
    UnknownFamily { case: &'static str, family: u32 },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("family constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("rule graph does not match the case preset")]
    GraphMismatch,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Which neighbourhood positions carry `ψ†` (`s`) and `ψ` (`t`). A position
/// in both stands for `ψ†ψ` at that position. The monomial is the product
/// over positions in template order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialDescriptor {
    pub s: u32,
    pub t: u32,
}

impl MonomialDescriptor {
    pub fn new(s: u32, t: u32, positions: usize) -> Result<Self, RuleError> {
        let d = MonomialDescriptor { s, t };
        if s == 0 && t == 0 {
            return Err(RuleError::EmptyDescriptor);
        }
        if d.degree().is_multiple_of(2) {
            return Err(RuleError::EvenDegree(d));
        }
        if positions < 32 && (s | t) >> positions != 0 {
            return Err(RuleError::PositionOutOfRange(d));
        }
        Ok(d)
    }

    pub fn from_positions(s: &[usize], t: &[usize], positions: usize) -> Result<Self, RuleError> {
        let mask = |v: &[usize]| v.iter().fold(0u32, |m, &p| m | (1u32 << p.min(31)));
        if let Some(&p) = s.iter().chain(t).find(|&&p| p >= positions) {
            let _ = p;
            return Err(RuleError::PositionOutOfRange(MonomialDescriptor { s: mask(s), t: mask(t) }));
        }
        Self::new(mask(s), mask(t), positions)
    }

    /// `ψ` at position `p`.
    pub fn annihilator(p: usize) -> Self {
        MonomialDescriptor { s: 0, t: 1 << p }
    }

    /// `ψ†` at position `p`.
    pub fn creator(p: usize) -> Self {
        MonomialDescriptor { s: 1 << p, t: 0 }
    }

    pub fn degree(&self) -> u32 {
        self.s.count_ones() + self.t.count_ones()
    }

    pub fn is_linear(&self) -> bool {
        self.degree() == 1
    }

    pub fn is_number_preserving(&self) -> bool {
        self.t.count_ones() == self.s.count_ones() + 1
    }

    pub fn s_positions(&self) -> Vec<usize> {
        crate::algebra::bit_positions(self.s)
    }

    pub fn t_positions(&self) -> Vec<usize> {
        crate::algebra::bit_positions(self.t)
    }

    /// Operator string in template order for the given position → site map.
    pub fn ops(&self, sites: &[usize]) -> Vec<FieldOp> {
        let mut ops = Vec::with_capacity(self.degree() as usize);
        for (p, &site) in sites.iter().enumerate() {
            if self.s >> p & 1 == 1 {
                ops.push(FieldOp::create(site));
            }
            if self.t >> p & 1 == 1 {
                ops.push(FieldOp::annihilate(site));
            }
        }
        ops
    }

    /// Descriptor with creator and annihilator roles exchanged.
    pub fn exchanged(&self) -> Self {
        MonomialDescriptor { s: self.t, t: self.s }
    }
}

/// All descriptors over `k` positions, optionally restricted to number
/// preserving ones, in sorted order.
pub fn all_descriptors(k: usize, number_preserving: bool) -> Vec<MonomialDescriptor> {
    let mut out = Vec::new();
    for s in 0u32..(1 << k) {
        for t in 0u32..(1 << k) {
            if let Ok(d) = MonomialDescriptor::new(s, t, k) {
                if !number_preserving || d.is_number_preserving() {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// A homogeneous local rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalRule<R> {
    graph: CayleyGraph,
    coefficients: BTreeMap<MonomialDescriptor, R>,
    number_preserving: bool,
}

impl<R: CoefficientRing> LocalRule<R> {
    pub fn new(
        graph: CayleyGraph,
        coefficients: BTreeMap<MonomialDescriptor, R>,
        number_preserving: bool,
    ) -> Result<Self, RuleError> {
        let k = graph.template().len();
        let mut kept = BTreeMap::new();
        for (d, c) in coefficients {
            let d = MonomialDescriptor::new(d.s, d.t, k)?;
            if number_preserving && !d.is_number_preserving() {
                return Err(RuleError::NotNumberPreserving(d));
            }
            if !c.is_zero() {
                kept.insert(d, c);
            }
        }
        Ok(LocalRule { graph, coefficients: kept, number_preserving })
    }

    /// The rule `ψ'_g = ψ_g`.
    pub fn identity(graph: CayleyGraph) -> Result<Self, RuleError> {
        let p = graph
            .template()
            .iter()
            .position(|&h| h == Element::IDENTITY)
            .ok_or(RuleError::OutsideNeighborhood(graph.site_of(Element::IDENTITY)))?;
        let mut c = BTreeMap::new();
        c.insert(MonomialDescriptor::annihilator(p), R::one());
        Self::new(graph, c, true)
    }

    pub fn graph(&self) -> &CayleyGraph {
        &self.graph
    }

    pub fn coefficients(&self) -> &BTreeMap<MonomialDescriptor, R> {
        &self.coefficients
    }

    pub fn coefficient(&self, d: &MonomialDescriptor) -> R {
        self.coefficients.get(d).cloned().unwrap_or_else(R::zero)
    }

    pub fn is_number_preserving(&self) -> bool {
        self.number_preserving
    }

    pub fn site_count(&self) -> usize {
        self.graph.site_count()
    }

    fn template_sites(&self) -> Vec<usize> {
        self.graph.template().iter().map(|&h| self.graph.site_of(h)).collect()
    }

    /// `ψ'_e` as a canonical polynomial.
    pub fn template_polynomial(&self) -> FermionPolynomial<R> {
        let n = self.site_count();
        let sites = self.template_sites();
        let mut out = FermionPolynomial::zero(n).expect("graph size checked");
        for (d, c) in &self.coefficients {
            let mono: FermionPolynomial<R> = normal_order(n, &d.ops(&sites), false).expect("sites in range");
            out = out.add(&mono.scale(c)).expect("same modes");
        }
        out
    }

    /// `ψ'_g`: the template polynomial translated by `g`.
    pub fn evolved_operator(&self, g: Element) -> Result<FermionPolynomial<R>, RuleError> {
        self.graph.group().check(g)?;
        Ok(self.template_polynomial().translate(g, &self.graph)?)
    }

    /// `ψ'` for every site, indexed by site position.
    pub fn evolved_operators(&self) -> Vec<FermionPolynomial<R>> {
        let base = self.template_polynomial();
        (0..self.site_count())
            .map(|i| base.translate(self.graph.element_at(i), &self.graph).expect("graph matches"))
            .collect()
    }

    /// Reads a rule back from a polynomial supported on the neighbourhood of
    /// the identity.
    pub fn from_template_polynomial(
        graph: CayleyGraph,
        poly: &FermionPolynomial<R>,
        number_preserving: bool,
    ) -> Result<Self, RuleError> {
        let n = graph.site_count();
        let sites: Vec<usize> = graph.template().iter().map(|&h| graph.site_of(h)).collect();
        let mut position = alloc::vec![None; n];
        for (p, &s) in sites.iter().enumerate() {
            position[s] = Some(p);
        }
        let mut coefficients = BTreeMap::new();
        for (key, c) in poly.terms() {
            let lookup = |site: usize| position.get(site).copied().flatten().ok_or(RuleError::OutsideNeighborhood(site));
            let s: Vec<usize> = key.create_sites().into_iter().map(lookup).collect::<Result<_, _>>()?;
            let t: Vec<usize> = key.annihilate_sites().into_iter().map(lookup).collect::<Result<_, _>>()?;
            let d = MonomialDescriptor::from_positions(&s, &t, sites.len())?;
            // Sign relating the template-order product to the canonical monomial.
            let canon: FermionPolynomial<R> = normal_order(n, &d.ops(&sites), false)?;
            let sign = canon.coefficient(key);
            coefficients.insert(d, c.mul(&sign));
        }
        Self::new(graph, coefficients, number_preserving)
    }

    /// Keeps only the degree-one terms.
    pub fn linearized(&self) -> Self {
        let coefficients = self.coefficients.iter().filter(|(d, _)| d.is_linear()).map(|(d, c)| (*d, c.clone())).collect();
        LocalRule { graph: self.graph.clone(), coefficients, number_preserving: self.number_preserving }
    }

    /// The rule conjugated by the global flip `∏(ψ_g + ψ†_g)`, which maps
    /// `ψ_x ↦ (-1)^{N-1} ψ†_x`.
    pub fn flipped(&self) -> Result<Self, RuleError> {
        let negate = (self.site_count() - 1) % 2 == 1;
        let poly = self.template_polynomial().exchange_roles(negate);
        Self::from_template_polynomial(self.graph.clone(), &poly, false)
    }

    pub fn map_coefficients<S: CoefficientRing>(&self, f: impl Fn(&R) -> S) -> LocalRule<S> {
        let coefficients = self
            .coefficients
            .iter()
            .map(|(d, c)| (*d, f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        LocalRule { graph: self.graph.clone(), coefficients, number_preserving: self.number_preserving }
    }
}

/// A rule whose coefficients are independent symbols, together with the
/// symbol name of every descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicTemplate {
    pub rule: LocalRule<SymPoly>,
    pub names: BTreeMap<MonomialDescriptor, String>,
}

/// Name of the coefficient of `n_i n_j ψ_x` (degree five annihilator terms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuinticName {
    Gamma,
    Mu,
}

impl SymbolicTemplate {
    pub fn from_descriptors(
        graph: CayleyGraph,
        descriptors: &[MonomialDescriptor],
        number_preserving: bool,
        quintic: QuinticName,
    ) -> Result<Self, RuleError> {
        let mut names = BTreeMap::new();
        let mut coefficients = BTreeMap::new();
        for d in descriptors {
            let name = descriptor_name(&graph, d, quintic);
            coefficients.insert(*d, SymPoly::variable(&name));
            names.insert(*d, name);
        }
        let rule = LocalRule::new(graph, coefficients, number_preserving)?;
        Ok(SymbolicTemplate { rule, names })
    }

    /// Every number-preserving descriptor.
    pub fn number_preserving(graph: CayleyGraph, quintic: QuinticName) -> Result<Self, RuleError> {
        let d = all_descriptors(graph.template().len(), true);
        Self::from_descriptors(graph, &d, true, quintic)
    }

    /// Every odd-degree descriptor.
    pub fn general(graph: CayleyGraph, quintic: QuinticName) -> Result<Self, RuleError> {
        let d = all_descriptors(graph.template().len(), false);
        Self::from_descriptors(graph, &d, false, quintic)
    }

    pub fn descriptor(&self, name: &str) -> Option<MonomialDescriptor> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(d, _)| *d)
    }

    /// Assignment of symbol values from a numeric rule on the same graph.
    /// Descriptors absent from the rule are assigned zero.
    pub fn assignment(
        &self,
        rule: &LocalRule<num_complex::Complex64>,
    ) -> Result<BTreeMap<String, num_complex::Complex64>, RuleError> {
        if rule.graph() != self.rule.graph() {
            return Err(RuleError::GraphMismatch);
        }
        for d in rule.coefficients().keys() {
            if !self.names.contains_key(d) {
                return Err(RuleError::NotNumberPreserving(*d));
            }
        }
        Ok(self.names.iter().map(|(d, n)| (n.clone(), rule.coefficient(d))).collect())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Empty,
    Create,
    Annihilate,
    Number,
}

/// Systematic coefficient names. Single-field terms are named after the
/// field and the number operators dressing it (`alpha`, `gamma`, `beta`,
/// `eta`, then `mu`/`gamma` and `nu`); three distinct fields give `xi`,
/// `chi`, `theta`, `thetabar`. Index strings list template labels cyclically.
pub fn descriptor_name(graph: &CayleyGraph, d: &MonomialDescriptor, quintic: QuinticName) -> String {
    let template = graph.template();
    let k = template.len();
    let label = |p: usize| graph.group().label(template[p % k]);
    let single = template.iter().all(|&h| graph.group().label(h).chars().count() == 1);
    let join = |ps: &[usize]| {
        let parts: Vec<&str> = ps.iter().map(|&p| label(p)).collect();
        if single {
            parts.concat()
        } else {
            parts.join("_")
        }
    };
    let slots: Vec<Slot> = (0..k)
        .map(|p| match (d.s >> p & 1, d.t >> p & 1) {
            (1, 1) => Slot::Number,
            (1, 0) => Slot::Create,
            (0, 1) => Slot::Annihilate,
            _ => Slot::Empty,
        })
        .collect();
    let fields: Vec<usize> = (0..k).filter(|&p| matches!(slots[p], Slot::Create | Slot::Annihilate)).collect();
    let numbers: Vec<usize> = (0..k).filter(|&p| slots[p] == Slot::Number).collect();
    let ending_at = |p: usize| -> Vec<usize> { (1..=k).map(|i| (p + i) % k).collect() };
    let starting_at = |p: usize| -> Vec<usize> { (0..k).map(|i| (p + i) % k).collect() };

    if fields.len() == 1 {
        let f = fields[0];
        let create = slots[f] == Slot::Create;
        match (numbers.len(), create) {
            (0, false) => return format!("alpha_{}", label(f)),
            (0, true) => return format!("gamma_{}", label(f)),
            (1, false) => return format!("beta_{}", join(&[numbers[0], f])),
            (1, true) => return format!("eta_{}", join(&[numbers[0], f])),
            (2, _) if k == 3 => {
                let head = match (create, quintic) {
                    (true, _) => "nu",
                    (false, QuinticName::Gamma) => "gamma",
                    (false, QuinticName::Mu) => "mu",
                };
                return format!("{}_{}", head, join(&ending_at(f)));
            }
            _ => {}
        }
    }
    if fields.len() == 3 && numbers.is_empty() && k == 3 {
        let creators: Vec<usize> = fields.iter().copied().filter(|&p| slots[p] == Slot::Create).collect();
        match creators.len() {
            0 => return String::from("theta"),
            3 => return String::from("thetabar"),
            1 => return format!("xi_{}", join(&starting_at(creators[0]))),
            _ => {
                let a = fields.iter().copied().find(|&p| slots[p] == Slot::Annihilate).expect("one annihilator");
                return format!("chi_{}", join(&ending_at(a)));
            }
        }
    }
    let bits = |m: u32| (0..k).map(|p| if m >> p & 1 == 1 { '1' } else { '0' }).collect::<String>();
    format!("c_s{}_t{}", bits(d.s), bits(d.t))
}
