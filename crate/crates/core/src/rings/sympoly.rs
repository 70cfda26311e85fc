use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use thiserror::Error;

use super::GaussianRational;
use crate::algebra::{CoefficientRing, ToComplex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("no value assigned to variable `{0}`")]
    MissingVariable(String),
}

/// A coefficient symbol or its formal conjugate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub name: Arc<str>,
    pub conjugated: bool,
}

impl Variable {
    pub fn new(name: &str) -> Self {
        Variable { name: Arc::from(name), conjugated: false }
    }

    pub fn conjugate(&self) -> Self {
        Variable { name: self.name.clone(), conjugated: !self.conjugated }
    }

    /// Text form: the name, with a trailing `*` when conjugated.
    pub fn label(&self) -> String {
        let mut s = self.name.to_string();
        if self.conjugated {
            s.push('*');
        }
        s
    }

    /// Inverse of [`Variable::label`].
    pub fn parse(label: &str) -> Self {
        match label.strip_suffix('*') {
            Some(name) => Variable { name: Arc::from(name), conjugated: true },
            None => Variable::new(label),
        }
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A sorted multiset of variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<Variable>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut vars: Vec<Variable>) -> Self {
        vars.sort();
        Monomial(vars)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i].clone());
                i += 1;
            } else {
                out.push(other.0[j].clone());
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    fn conj(&self) -> Self {
        Monomial::new(self.0.iter().map(Variable::conjugate).collect())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            f.write_str(&v.label())?;
        }
        Ok(())
    }
}

/// A polynomial with Gaussian-rational coefficients in [`Variable`]s.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymPoly {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl SymPoly {
    pub fn variable(name: &str) -> Self {
        Self::monomial(Monomial(alloc::vec![Variable::new(name)]), GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn monomial(m: Monomial, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SymPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, GaussianRational)>>(terms: I) -> Self {
        let mut p = SymPoly::default();
        for (m, c) in terms {
            p.accumulate(m, c);
        }
        p
    }

    fn accumulate(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.add(&c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Names of all variables, conjugated or not.
    pub fn variable_names(&self) -> BTreeSet<Arc<str>> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|v| v.name.clone())).collect()
    }

    /// The constant term, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        SymPoly::from_terms(self.terms.iter().map(|(m, v)| (m.clone(), v.mul(c))))
    }

    /// Divides by the coefficient of the largest monomial, so that scalar
    /// multiples share one normal form.
    pub fn monic(&self) -> Self {
        match self.terms.iter().next_back() {
            Some((_, lead)) => self.scale(&lead.inverse().expect("stored coefficients are nonzero")),
            None => self.clone(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Substitutes values; conjugated variables receive the complex conjugate.
    pub fn evaluate(&self, assignment: &BTreeMap<String, Complex64>) -> Result<Complex64, SymbolError> {
        self.evaluate_with(|name| assignment.get(name).copied())
    }

    pub fn evaluate_with(&self, lookup: impl Fn(&str) -> Option<Complex64>) -> Result<Complex64, SymbolError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut term = c.to_complex64();
            for v in &m.0 {
                let value = lookup(&v.name).ok_or_else(|| SymbolError::MissingVariable(v.name.to_string()))?;
                term *= if v.conjugated { value.conj() } else { value };
            }
            total += term;
        }
        Ok(total)
    }

    /// Replaces every occurrence of a variable name by a polynomial in which
    /// that name does not occur (conjugated occurrences get its conjugate).
    pub fn substitute(&self, name: &str, value: &SymPoly) -> Self {
        let value_conj = value.conj();
        let mut out = SymPoly::default();
        for (m, c) in &self.terms {
            let mut acc = SymPoly::constant(c.clone());
            let mut rest = Vec::new();
            for v in &m.0 {
                if &*v.name == name {
                    acc = acc.mul(if v.conjugated { &value_conj } else { value });
                } else {
                    rest.push(v.clone());
                }
            }
            acc = acc.mul(&SymPoly::monomial(Monomial::new(rest), GaussianRational::one()));
            for (mm, cc) in acc.terms {
                out.accumulate(mm, cc);
            }
        }
        out
    }
}

impl CoefficientRing for SymPoly {
    fn zero() -> Self {
        SymPoly::default()
    }
    fn one() -> Self {
        SymPoly::constant(GaussianRational::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out
    }
    fn mul(&self, other: &Self) -> Self {
        let mut out = SymPoly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.accumulate(m1.mul(m2), c1.mul(c2));
            }
        }
        out
    }
    fn neg(&self) -> Self {
        SymPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }
    fn conj(&self) -> Self {
        SymPoly::from_terms(self.terms.iter().map(|(m, c)| (m.conj(), c.conj())))
    }
}

impl ToComplex for SymPoly {
    fn to_complex(&self) -> Option<Complex64> {
        self.as_constant().map(|c| c.to_complex64())
    }
}

impl fmt::Debug for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.0.is_empty() {
                write!(f, "{}", c)?;
            } else if *c == GaussianRational::one() {
                write!(f, "{:?}", m)?;
            } else {
                write!(f, "{}·{:?}", c, m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn var(n: &str) -> SymPoly {
        SymPoly::variable(n)
    }

    fn num(re: i64, im: i64) -> SymPoly {
        SymPoly::constant(GaussianRational::new_integers(re, im))
    }

    fn assign(pairs: &[(&str, Complex64)]) -> BTreeMap<String, Complex64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn conjugation_examples() {
        let a = var("alpha_x");
        assert_eq!(a.conj(), SymPoly::monomial(Monomial::new(vec![Variable::parse("alpha_x*")]), GaussianRational::one()));
        let b = var("beta");
        let bb = num(2, 0).mul(&b).mul(&b.conj());
        assert_eq!(bb.conj(), bb);
        let ia = num(0, 1).mul(&var("alpha"));
        assert_eq!(ia.conj(), num(0, -1).mul(&var("alpha").conj()));
    }

    #[test]
    fn evaluation_examples() {
        let a = var("alpha");
        let norm = a.mul(&a.conj()).sub(&SymPoly::one());
        let th = 0.83_f64;
        let v = norm.evaluate(&assign(&[("alpha", Complex64::from_polar(1.0, th))])).unwrap();
        assert!(v.norm() < 1e-15);

        let b = var("beta");
        let rel = var("gamma").sub(&b.mul(&b));
        let v = rel.evaluate(&assign(&[("beta", Complex64::new(-2.0, 0.0)), ("gamma", Complex64::new(4.0, 0.0))])).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));

        let mn = var("mu").mul(&var("nu"));
        let v = mn.evaluate(&assign(&[("mu", Complex64::new(0.3, 0.0)), ("nu", Complex64::new(0.7, 0.0))])).unwrap();
        assert!((v - Complex64::new(0.21, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn missing_variable() {
        let err = var("mu").evaluate(&BTreeMap::new()).unwrap_err();
        assert_eq!(err, SymbolError::MissingVariable("mu".to_string()));
    }

    #[test]
    fn monic_normal_form() {
        let p = var("a").add(&num(2, 0).mul(&var("b")));
        let q = p.scale(&GaussianRational::new_integers(0, 3));
        assert_eq!(p.monic(), q.monic());
    }

    #[test]
    fn substitution() {
        let p = var("a").mul(&var("a").conj());
        let s = p.substitute("a", &num(0, 1).mul(&var("b")));
        assert_eq!(s, var("b").mul(&var("b").conj()));
    }

    #[test]
    fn constants() {
        assert_eq!(num(3, 1).as_constant(), Some(GaussianRational::new_integers(3, 1)));
        assert_eq!(SymPoly::zero().as_constant(), Some(GaussianRational::zero()));
        assert_eq!(var("x").as_constant(), None);
    }
}
