//! JSON documents for every pipeline artifact.
//!
//! Complex numbers are `[re, im]` pairs and exact Gaussian rationals are
//! `[num, den, num_i, den_i]` (integers, or decimal strings when they do not
//! fit in 64 bits). Output is deterministic: keys follow struct or sorted-map
//! order and every float is written with 17 significant digits.

use std::collections::BTreeMap;
use std::io;

use fca_core::algebra::AlgebraError;
use fca_core::constraints::{BracketKind, ConstraintSystem, Equation, Provenance, VerificationReport};
use fca_core::discrimination::{DiscriminationReport, EigenParity, Eigenpair};
use fca_core::groups::GroupError;
use fca_core::linalg::{CMatrix, CVector};
use fca_core::matrixrep::{BasisOrdering, EvolutionMatrix, MatrixError, SectorBlocks};
use fca_core::rings::Monomial;
use fca_core::rules::{FamilyParams, ParamValue, RuleError};
use fca_core::{
    CayleyGraph, CoefficientRing, Complex64, Element, FermionPolynomial, FiniteGroup, GaussianRational, LocalRule,
    MonomialDescriptor, MonomialKey, SymPoly, Variable,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// Compact output with every float at 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes a document deterministically, with a trailing newline.
pub fn to_string<T: Serialize>(doc: &T) -> Result<String, FormatError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    doc.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| invalid(e.to_string()))
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T, FormatError> {
    Ok(serde_json::from_str(s)?)
}

pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn bits(sites: &[usize]) -> Result<u32, FormatError> {
    sites.iter().try_fold(0u32, |m, &s| {
        if s >= 32 {
            Err(invalid(format!("site {} out of range", s)))
        } else {
            Ok(m | 1 << s)
        }
    })
}

fn sites(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask >> k & 1 == 1).collect()
}

// Coefficients

/// JSON encoding of a coefficient ring.
pub trait CoefficientJson: CoefficientRing {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, FormatError>;
}

impl CoefficientJson for Complex64 {
    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn from_json(v: &Value) -> Result<Self, FormatError> {
        let p: Pair = serde_json::from_value(v.clone())?;
        Ok(complex(p))
    }
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(i) => Value::from(i),
        None => Value::from(n.to_string()),
    }
}

fn int_from_json(v: &Value) -> Result<BigInt, FormatError> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| invalid(format!("`{}` is not an integer", n))),
        Value::String(s) => s.parse().map_err(|_| invalid(format!("`{}` is not an integer", s))),
        _ => Err(invalid("expected an integer")),
    }
}

fn ratio(num: &Value, den: &Value) -> Result<BigRational, FormatError> {
    let d = int_from_json(den)?;
    if d.is_zero() {
        return Err(invalid("zero denominator"));
    }
    Ok(BigRational::new(int_from_json(num)?, d))
}

impl CoefficientJson for GaussianRational {
    fn to_json(&self) -> Value {
        Value::Array(vec![int_json(self.re.numer()), int_json(self.re.denom()), int_json(self.im.numer()), int_json(self.im.denom())])
    }

    fn from_json(v: &Value) -> Result<Self, FormatError> {
        match v.as_array().map(Vec::as_slice) {
            Some([a, b, c, d]) => Ok(GaussianRational::new(ratio(a, b)?, ratio(c, d)?)),
            _ => Err(invalid("Gaussian rational must be [num, den, num_i, den_i]")),
        }
    }
}

/// One term of a symbolic coefficient: variable labels (`name` or `name*`)
/// and an exact coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTermDoc {
    pub monomial: Vec<String>,
    pub coeff: Value,
}

pub fn sympoly_doc(p: &SymPoly) -> Vec<SymTermDoc> {
    p.terms()
        .map(|(m, c)| SymTermDoc { monomial: m.variables().iter().map(Variable::label).collect(), coeff: c.to_json() })
        .collect()
}

pub fn sympoly_from_doc(doc: &[SymTermDoc]) -> Result<SymPoly, FormatError> {
    let terms = doc
        .iter()
        .map(|t| {
            let vars = t.monomial.iter().map(|l| Variable::parse(l)).collect();
            Ok((Monomial::new(vars), GaussianRational::from_json(&t.coeff)?))
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(SymPoly::from_terms(terms))
}

impl CoefficientJson for SymPoly {
    fn to_json(&self) -> Value {
        serde_json::to_value(sympoly_doc(self)).expect("plain data")
    }

    fn from_json(v: &Value) -> Result<Self, FormatError> {
        let doc: Vec<SymTermDoc> = serde_json::from_value(v.clone())?;
        sympoly_from_doc(&doc)
    }
}

// Polynomials

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialDoc {
    pub create: Vec<usize>,
    pub annihilate: Vec<usize>,
}

impl MonomialDoc {
    pub fn new(k: &MonomialKey) -> Self {
        MonomialDoc { create: k.create_sites(), annihilate: k.annihilate_sites() }
    }

    pub fn key(&self) -> Result<MonomialKey, FormatError> {
        Ok(MonomialKey::new(bits(&self.create)?, bits(&self.annihilate)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTermDoc {
    pub create: Vec<usize>,
    pub annihilate: Vec<usize>,
    pub coeff: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub modes: usize,
    pub terms: Vec<PolyTermDoc>,
}

pub fn polynomial_doc<R: CoefficientJson>(p: &FermionPolynomial<R>) -> PolynomialDoc {
    let terms = p
        .terms()
        .map(|(k, c)| PolyTermDoc { create: k.create_sites(), annihilate: k.annihilate_sites(), coeff: c.to_json() })
        .collect();
    PolynomialDoc { modes: p.modes(), terms }
}

pub fn polynomial_from_doc<R: CoefficientJson>(doc: &PolynomialDoc) -> Result<FermionPolynomial<R>, FormatError> {
    let terms = doc
        .terms
        .iter()
        .map(|t| Ok((MonomialKey::new(bits(&t.create)?, bits(&t.annihilate)?), R::from_json(&t.coeff)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(FermionPolynomial::from_terms(doc.modes, terms)?)
}

// Groups and graphs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupDoc {
    Preset {
        preset: String,
    },
    Table {
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

impl GroupDoc {
    pub fn group(&self) -> Result<FiniteGroup, FormatError> {
        Ok(match self {
            GroupDoc::Preset { preset } => FiniteGroup::preset(preset)?,
            GroupDoc::Table { table, labels } => FiniteGroup::from_table(table, labels.clone())?,
        })
    }

    /// Preset form when the group equals a preset, table form otherwise.
    pub fn new(g: &FiniteGroup) -> Self {
        if *g == FiniteGroup::klein_four() {
            return GroupDoc::Preset { preset: "Z2xZ2".into() };
        }
        if FiniteGroup::cyclic(g.order()).is_ok_and(|c| c == *g) {
            return GroupDoc::Preset { preset: format!("Z{}", g.order()) };
        }
        GroupDoc::Table { table: g.table(), labels: Some(g.labels().to_vec()) }
    }
}

/// Builds a Cayley graph. Without explicit generators the shortest prefix of
/// the non-identity neighbourhood elements that generates the group is used
/// (all non-identity elements as a fallback). Without an explicit site order
/// the neighbourhood comes first, then the remaining elements in reverse
/// table order; this reproduces both case-study presets.
pub fn build_graph(
    group: FiniteGroup,
    generators: Option<&[String]>,
    neighborhood: &[String],
    site_order: Option<&[String]>,
) -> Result<CayleyGraph, FormatError> {
    let look = |ls: &[String]| ls.iter().map(|l| group.element(l)).collect::<Result<Vec<Element>, _>>();
    let template = look(neighborhood)?;
    let generators = match generators {
        Some(g) => look(g)?,
        None => {
            let candidates: Vec<Element> = template.iter().copied().filter(|&e| e != Element::IDENTITY).collect();
            (1..=candidates.len())
                .map(|k| candidates[..k].to_vec())
                .find(|c| group.generated_subgroup(c).len() == group.order())
                .unwrap_or_else(|| group.elements().filter(|&e| e != Element::IDENTITY).collect())
        }
    };
    let order = match site_order {
        Some(o) => look(o)?,
        None => {
            let mut o = template.clone();
            let all: Vec<Element> = group.elements().collect();
            o.extend(all.into_iter().rev().filter(|e| !template.contains(e)));
            o
        }
    };
    Ok(CayleyGraph::new(group.clone(), generators, template)?.with_site_order(order)?)
}

fn labels(graph: &CayleyGraph, es: &[Element]) -> Vec<String> {
    es.iter().map(|&e| graph.group().label(e).to_string()).collect()
}

// Rules

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTermDoc {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub group: GroupDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    pub neighborhood: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_order: Option<Vec<String>>,
    pub number_preserving: bool,
    pub terms: Vec<RuleTermDoc>,
}

/// A rule read from JSON: numeric when every term has `coeff`, symbolic
/// when every term has `symbol`.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedRule {
    Numeric(LocalRule<Complex64>),
    Symbolic(LocalRule<SymPoly>),
}

impl RuleDoc {
    fn header(graph: &CayleyGraph, number_preserving: bool) -> Self {
        RuleDoc {
            group: GroupDoc::new(graph.group()),
            generators: Some(labels(graph, graph.generators())),
            neighborhood: labels(graph, graph.template()),
            site_order: Some(labels(graph, graph.site_order())),
            number_preserving,
            terms: Vec::new(),
        }
    }

    pub fn numeric(rule: &LocalRule<Complex64>) -> Self {
        let mut doc = Self::header(rule.graph(), rule.is_number_preserving());
        doc.terms = rule
            .coefficients()
            .iter()
            .map(|(d, c)| RuleTermDoc { s: sites(d.s), t: sites(d.t), coeff: Some(pair(*c)), symbol: None })
            .collect();
        doc
    }

    /// Every coefficient must be a single plain symbol.
    pub fn symbolic(rule: &LocalRule<SymPoly>) -> Result<Self, FormatError> {
        let mut doc = Self::header(rule.graph(), rule.is_number_preserving());
        for (d, c) in rule.coefficients() {
            let mut terms = c.terms();
            let name = match (terms.next(), terms.next()) {
                (Some((m, k)), None) if *k == GaussianRational::one() && m.variables().len() == 1 && !m.variables()[0].conjugated => {
                    m.variables()[0].name.to_string()
                }
                _ => return Err(invalid("symbolic rule coefficients must be single symbols")),
            };
            doc.terms.push(RuleTermDoc { s: sites(d.s), t: sites(d.t), coeff: None, symbol: Some(name) });
        }
        Ok(doc)
    }

    pub fn graph(&self) -> Result<CayleyGraph, FormatError> {
        build_graph(self.group.group()?, self.generators.as_deref(), &self.neighborhood, self.site_order.as_deref())
    }

    pub fn rule(&self) -> Result<ParsedRule, FormatError> {
        let graph = self.graph()?;
        let k = graph.template().len();
        let descriptor = |t: &RuleTermDoc| -> Result<MonomialDescriptor, FormatError> {
            if t.s.iter().chain(&t.t).any(|&p| p >= k) {
                return Err(invalid(format!("term position out of range for a template of size {}", k)));
            }
            Ok(MonomialDescriptor::from_positions(&t.s, &t.t, k)?)
        };
        let symbolic = self.terms.iter().any(|t| t.symbol.is_some());
        if symbolic {
            let mut coeffs = BTreeMap::new();
            for t in &self.terms {
                match (&t.symbol, t.coeff) {
                    (Some(s), None) => insert_once(&mut coeffs, descriptor(t)?, SymPoly::variable(s))?,
                    _ => return Err(invalid("a symbolic rule needs exactly one `symbol` per term")),
                }
            }
            Ok(ParsedRule::Symbolic(LocalRule::new(graph, coeffs, self.number_preserving)?))
        } else {
            let mut coeffs = BTreeMap::new();
            for t in &self.terms {
                let c = t.coeff.ok_or_else(|| invalid("every term needs `coeff` or `symbol`"))?;
                insert_once(&mut coeffs, descriptor(t)?, complex(c))?;
            }
            Ok(ParsedRule::Numeric(LocalRule::new(graph, coeffs, self.number_preserving)?))
        }
    }
}

fn insert_once<R>(m: &mut BTreeMap<MonomialDescriptor, R>, d: MonomialDescriptor, c: R) -> Result<(), FormatError> {
    if m.insert(d, c).is_some() {
        return Err(invalid(format!("descriptor {:?} listed twice", d)));
    }
    Ok(())
}

// Constraint systems

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationDoc {
    pub lhs: Vec<SymTermDoc>,
    pub rhs: u8,
    pub pair: [usize; 2],
    pub bracket: String,
    pub monomial: MonomialDoc,
}

pub fn system_doc(s: &ConstraintSystem) -> Vec<EquationDoc> {
    s.equations
        .iter()
        .map(|e| EquationDoc {
            lhs: sympoly_doc(&e.lhs),
            rhs: e.rhs,
            pair: [e.provenance.x, e.provenance.y],
            bracket: e.provenance.bracket.tag().to_string(),
            monomial: MonomialDoc::new(&e.provenance.monomial),
        })
        .collect()
}

fn provenance(pair: [usize; 2], bracket: &str, monomial: &MonomialDoc) -> Result<Provenance, FormatError> {
    let bracket = BracketKind::parse(bracket).ok_or_else(|| invalid(format!("unknown bracket `{}`", bracket)))?;
    Ok(Provenance { x: pair[0], y: pair[1], bracket, monomial: monomial.key()? })
}

pub fn system_from_doc(doc: &[EquationDoc]) -> Result<ConstraintSystem, FormatError> {
    let equations = doc
        .iter()
        .map(|e| {
            if e.rhs > 1 {
                return Err(invalid("rhs must be 0 or 1"));
            }
            Ok(Equation { lhs: sympoly_from_doc(&e.lhs)?, rhs: e.rhs, provenance: provenance(e.pair, &e.bracket, &e.monomial)? })
        })
        .collect::<Result<_, _>>()?;
    Ok(ConstraintSystem { equations })
}

pub type AssignmentDoc = BTreeMap<String, Pair>;

pub fn assignment_doc(a: &BTreeMap<String, Complex64>) -> AssignmentDoc {
    a.iter().map(|(k, v)| (k.clone(), pair(*v))).collect()
}

pub fn assignment_from_doc(doc: &AssignmentDoc) -> BTreeMap<String, Complex64> {
    doc.iter().map(|(k, v)| (k.clone(), complex(*v))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDoc {
    pub pair: [usize; 2],
    pub bracket: String,
    pub monomial: MonomialDoc,
    /// `null` when the residual is not finite.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationDoc {
    pub pass: bool,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub failures: Vec<FailureDoc>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl VerificationDoc {
    pub fn new(r: &VerificationReport) -> Self {
        VerificationDoc {
            pass: r.pass,
            max_residual: finite(r.max_residual),
            tolerance: r.tolerance,
            failures: r
                .failures
                .iter()
                .map(|(p, res)| FailureDoc {
                    pair: [p.x, p.y],
                    bracket: p.bracket.tag().to_string(),
                    monomial: MonomialDoc::new(&p.monomial),
                    residual: finite(*res),
                })
                .collect(),
        }
    }

    pub fn report(&self) -> Result<VerificationReport, FormatError> {
        let failures = self
            .failures
            .iter()
            .map(|f| Ok((provenance(f.pair, &f.bracket, &f.monomial)?, f.residual.unwrap_or(f64::INFINITY))))
            .collect::<Result<_, FormatError>>()?;
        Ok(VerificationReport {
            max_residual: self.max_residual.unwrap_or(f64::INFINITY),
            failures,
            tolerance: self.tolerance,
            pass: self.pass,
        })
    }
}

// Matrices

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    /// Site labels; bit `k` of every occupation string refers to `sites[k]`.
    pub sites: Vec<String>,
    pub ordering: Vec<String>,
    /// Row-major entries.
    pub data: Vec<Pair>,
}

fn row_major(m: &CMatrix) -> Vec<Pair> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| pair(m[(i, j)]))).collect()
}

fn from_row_major(rows: usize, cols: usize, data: &[Pair]) -> Result<CMatrix, FormatError> {
    if data.len() != rows * cols {
        return Err(invalid(format!("expected {} entries, got {}", rows * cols, data.len())));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| complex(data[i * cols + j])))
}

impl MatrixDoc {
    pub fn new(u: &EvolutionMatrix) -> Self {
        MatrixDoc {
            dim: u.dim(),
            sites: u.ordering.sites().to_vec(),
            ordering: u.ordering.state_strings(),
            data: row_major(&u.matrix),
        }
    }

    /// Rebuilds the matrix, checking unitarity to `tol`.
    pub fn evolution(&self, tol: f64) -> Result<EvolutionMatrix, FormatError> {
        let states: Vec<&str> = self.ordering.iter().map(String::as_str).collect();
        let ordering = BasisOrdering::new(self.sites.clone(), &states)?;
        if ordering.dim() != self.dim {
            return Err(invalid(format!("dim {} does not match {} sites", self.dim, self.sites.len())));
        }
        let m = from_row_major(self.dim, self.dim, &self.data)?;
        Ok(EvolutionMatrix::new(m, ordering, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Pair>,
}

impl BlockDoc {
    pub fn new(m: &CMatrix) -> Self {
        BlockDoc { rows: m.nrows(), cols: m.ncols(), data: row_major(m) }
    }

    pub fn matrix(&self) -> Result<CMatrix, FormatError> {
        from_row_major(self.rows, self.cols, &self.data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlocksDoc {
    pub blocks: BTreeMap<String, BlockDoc>,
    pub leakage: BTreeMap<String, f64>,
}

impl BlocksDoc {
    pub fn new(b: &SectorBlocks) -> Self {
        BlocksDoc { blocks: b.blocks.iter().map(|(k, m)| (k.clone(), BlockDoc::new(m))).collect(), leakage: b.leakage.clone() }
    }

    pub fn blocks(&self) -> Result<SectorBlocks, FormatError> {
        let blocks = self.blocks.iter().map(|(k, b)| Ok((k.clone(), b.matrix()?))).collect::<Result<_, FormatError>>()?;
        Ok(SectorBlocks { blocks, leakage: self.leakage.clone() })
    }
}

// Discrimination

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenpairDoc {
    pub value: Pair,
    pub parity: String,
    pub vector: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub eigenpairs: Vec<EigenpairDoc>,
    pub hull_distance_full: f64,
    pub hull_distance_even: Option<f64>,
    pub hull_distance_odd: Option<f64>,
    pub optimal_weights: BTreeMap<usize, f64>,
    pub sine_p_succ: f64,
    pub standard_p_opt: f64,
    pub perfectly_discriminable: bool,
    pub local_strategy_sufficient: bool,
    /// Distinct eigenvalues, for external plotting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<Pair>>,
}

fn parity_tag(p: EigenParity) -> &'static str {
    match p {
        EigenParity::Even => "even",
        EigenParity::Odd => "odd",
        EigenParity::Mixed => "mixed",
    }
}

fn parity_from_tag(s: &str) -> Result<EigenParity, FormatError> {
    match s {
        "even" => Ok(EigenParity::Even),
        "odd" => Ok(EigenParity::Odd),
        "mixed" => Ok(EigenParity::Mixed),
        _ => Err(invalid(format!("unknown parity `{}`", s))),
    }
}

impl ReportDoc {
    pub fn new(r: &DiscriminationReport, polygon: bool) -> Self {
        ReportDoc {
            eigenpairs: r
                .eigenpairs
                .iter()
                .map(|e| EigenpairDoc {
                    value: pair(e.value),
                    parity: parity_tag(e.parity).to_string(),
                    vector: e.vector.iter().map(|z| pair(*z)).collect(),
                })
                .collect(),
            hull_distance_full: r.hull_distance_full,
            hull_distance_even: r.hull_distance_even,
            hull_distance_odd: r.hull_distance_odd,
            optimal_weights: r.optimal_weights.clone(),
            sine_p_succ: r.sine_p_succ,
            standard_p_opt: r.standard_p_opt,
            perfectly_discriminable: r.perfectly_discriminable,
            local_strategy_sufficient: r.local_strategy_sufficient,
            polygon: polygon.then(|| r.distinct_eigenvalues().into_iter().map(pair).collect()),
        }
    }

    pub fn report(&self) -> Result<DiscriminationReport, FormatError> {
        let eigenpairs = self
            .eigenpairs
            .iter()
            .map(|e| {
                Ok(Eigenpair {
                    value: complex(e.value),
                    parity: parity_from_tag(&e.parity)?,
                    vector: CVector::from_iterator(e.vector.len(), e.vector.iter().map(|p| complex(*p))),
                })
            })
            .collect::<Result<_, FormatError>>()?;
        Ok(DiscriminationReport {
            eigenpairs,
            hull_distance_full: self.hull_distance_full,
            hull_distance_even: self.hull_distance_even,
            hull_distance_odd: self.hull_distance_odd,
            optimal_weights: self.optimal_weights.clone(),
            sine_p_succ: self.sine_p_succ,
            standard_p_opt: self.standard_p_opt,
            perfectly_discriminable: self.perfectly_discriminable,
            local_strategy_sufficient: self.local_strategy_sufficient,
        })
    }
}

// Family parameters

/// `{"name": number | "label"}`.
pub fn params_from_json(v: &Value) -> Result<FamilyParams, FormatError> {
    let obj = v.as_object().ok_or_else(|| invalid("parameters must be a JSON object"))?;
    let mut p = FamilyParams::new();
    for (k, v) in obj {
        p = match v {
            Value::Number(n) => p.real(k, n.as_f64().ok_or_else(|| invalid(format!("`{}` is not a number", k)))?),
            Value::String(s) => p.label(k, s),
            _ => return Err(invalid(format!("parameter `{}` must be a number or a label", k))),
        };
    }
    Ok(p)
}

pub fn params_to_json(p: &FamilyParams) -> Value {
    let map = p
        .0
        .iter()
        .map(|(k, v)| {
            let v = match v {
                ParamValue::Real(x) => Value::from(*x),
                ParamValue::Label(s) => Value::from(s.clone()),
            };
            (k.clone(), v)
        })
        .collect();
    Value::Object(map)
}
