//! Canonical normal-ordered polynomials in fermionic field operators.
//!
//! A monomial `ψ†_{c1}…ψ†_{ck} ψ_{a1}…ψ_{al}` with `c1 < … < ck` and
//! `a1 < … < al` is stored as the pair of bitsets `(C, A)`. Products are
//! formed by right-multiplying canonical monomials by one field operator at a
//! time, which keeps every intermediate result canonical.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::groups::{CayleyGraph, Element};

/// Maximum number of modes a polynomial may carry.
pub const MAX_MODES: usize = 32;

/// A commutative ring with an involutive conjugation.
pub trait CoefficientRing: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl CoefficientRing for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
}

/// Conversion of a coefficient to a double-precision complex number, when it
/// has a numeric value.
pub trait ToComplex {
    fn to_complex(&self) -> Option<Complex64>;
}

impl ToComplex for Complex64 {
    fn to_complex(&self) -> Option<Complex64> {
        Some(*self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("site {site} is out of range for {modes} modes")]
    SiteOutOfRange { site: usize, modes: usize },
    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },
    #[error("at most {MAX_MODES} modes are supported, got {0}")]
    TooManyModes(usize),
    #[error("polynomial has {poly} modes but the graph has {graph} sites")]
    GraphMismatch { poly: usize, graph: usize },
}

/// A single field operator `ψ_site` or `ψ†_site`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldOp {
    pub site: usize,
    pub dagger: bool,
}

impl FieldOp {
    pub const fn annihilate(site: usize) -> Self {
        FieldOp { site, dagger: false }
    }

    pub const fn create(site: usize) -> Self {
        FieldOp { site, dagger: true }
    }

    pub const fn adjoint(self) -> Self {
        FieldOp { site: self.site, dagger: !self.dagger }
    }
}

/// Key of a canonical monomial: bit `i` of `creators` means `ψ†_i` is present,
/// bit `i` of `annihilators` means `ψ_i` is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MonomialKey {
    pub creators: u32,
    pub annihilators: u32,
}

impl MonomialKey {
    pub const IDENTITY: MonomialKey = MonomialKey { creators: 0, annihilators: 0 };

    pub const fn new(creators: u32, annihilators: u32) -> Self {
        MonomialKey { creators, annihilators }
    }

    pub fn from_sites(create: &[usize], annihilate: &[usize]) -> Self {
        let mask = |s: &[usize]| s.iter().fold(0u32, |m, &i| m | (1 << i));
        MonomialKey::new(mask(create), mask(annihilate))
    }

    pub fn is_identity(&self) -> bool {
        self.creators == 0 && self.annihilators == 0
    }

    pub fn creator_count(&self) -> u32 {
        self.creators.count_ones()
    }

    pub fn annihilator_count(&self) -> u32 {
        self.annihilators.count_ones()
    }

    pub fn degree(&self) -> u32 {
        self.creator_count() + self.annihilator_count()
    }

    pub fn create_sites(&self) -> Vec<usize> {
        bit_positions(self.creators)
    }

    pub fn annihilate_sites(&self) -> Vec<usize> {
        bit_positions(self.annihilators)
    }

    /// The operator string in canonical order.
    pub fn ops(&self) -> Vec<FieldOp> {
        let mut ops: Vec<FieldOp> = self.create_sites().into_iter().map(FieldOp::create).collect();
        ops.extend(self.annihilate_sites().into_iter().map(FieldOp::annihilate));
        ops
    }
}

impl fmt::Display for MonomialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        let mut first = true;
        for op in self.ops() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if op.dagger {
                write!(f, "ψ†{}", op.site)?;
            } else {
                write!(f, "ψ{}", op.site)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn bit_positions(mut bits: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(bits.count_ones() as usize);
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        out.push(i);
        bits &= bits - 1;
    }
    out
}

#[inline]
fn above(bits: u32, x: usize) -> u32 {
    if x >= 31 {
        0
    } else {
        bits & !((2u32 << x) - 1)
    }
}

#[inline]
fn below(bits: u32, x: usize) -> u32 {
    bits & ((1u32 << x) - 1)
}

#[inline]
fn odd(n: u32) -> bool {
    n & 1 == 1
}

/// Right-multiplies the canonical monomial `key` by a single field operator.
/// Returns up to two canonical monomials with their signs (`true` = negative).
fn mul_op(key: MonomialKey, op: FieldOp) -> [Option<(MonomialKey, bool)>; 2] {
    let (c, a) = (key.creators, key.annihilators);
    let x = op.site;
    let bit = 1u32 << x;
    if !op.dagger {
        if a & bit != 0 {
            return [None, None];
        }
        let sign = odd(above(a, x).count_ones());
        return [Some((MonomialKey::new(c, a | bit), sign)), None];
    }
    let c_above = above(c, x).count_ones();
    if a & bit != 0 {
        let right = above(a, x).count_ones();
        let left = below(a, x).count_ones();
        let contraction = Some((MonomialKey::new(c, a & !bit), odd(right)));
        let moved = if c & bit != 0 {
            None
        } else {
            Some((MonomialKey::new(c | bit, a), !odd(right + left + c_above)))
        };
        [contraction, moved]
    } else if c & bit != 0 {
        [None, None]
    } else {
        let sign = odd(a.count_ones() + c_above);
        [Some((MonomialKey::new(c | bit, a), sign)), None]
    }
}

fn accumulate<R: CoefficientRing>(terms: &mut BTreeMap<MonomialKey, R>, key: MonomialKey, coeff: R) {
    if coeff.is_zero() {
        return;
    }
    match terms.get_mut(&key) {
        Some(existing) => {
            let sum = existing.add(&coeff);
            if sum.is_zero() {
                terms.remove(&key);
            } else {
                *existing = sum;
            }
        }
        None => {
            terms.insert(key, coeff);
        }
    }
}

fn signed<R: CoefficientRing>(c: &R, negative: bool) -> R {
    if negative {
        c.neg()
    } else {
        c.clone()
    }
}

/// A polynomial in `ψ_i`, `ψ†_i` (`0 <= i < modes`) in canonical normal order.
#[derive(Clone, PartialEq)]
pub struct FermionPolynomial<R> {
    modes: usize,
    terms: BTreeMap<MonomialKey, R>,
}

impl<R: CoefficientRing> fmt::Debug for FermionPolynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FermionPolynomial[{}]{{", self.modes)?;
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{:?}·{}", c, k)?;
        }
        f.write_str("}")
    }
}

impl<R: CoefficientRing> FermionPolynomial<R> {
    pub fn zero(modes: usize) -> Result<Self, AlgebraError> {
        if modes > MAX_MODES {
            return Err(AlgebraError::TooManyModes(modes));
        }
        Ok(FermionPolynomial { modes, terms: BTreeMap::new() })
    }

    pub fn identity(modes: usize) -> Result<Self, AlgebraError> {
        Self::scalar(modes, R::one())
    }

    pub fn scalar(modes: usize, c: R) -> Result<Self, AlgebraError> {
        let mut p = Self::zero(modes)?;
        accumulate(&mut p.terms, MonomialKey::IDENTITY, c);
        Ok(p)
    }

    pub fn annihilator(modes: usize, site: usize) -> Result<Self, AlgebraError> {
        normal_order(modes, &[FieldOp::annihilate(site)], false)
    }

    pub fn creator(modes: usize, site: usize) -> Result<Self, AlgebraError> {
        normal_order(modes, &[FieldOp::create(site)], false)
    }

    /// `n_site = ψ†_site ψ_site`.
    pub fn number(modes: usize, site: usize) -> Result<Self, AlgebraError> {
        normal_order(modes, &[FieldOp::create(site), FieldOp::annihilate(site)], false)
    }

    /// Builds a polynomial from raw terms, checking the site range and
    /// merging duplicates. Keys are already canonical by construction.
    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (MonomialKey, R)>,
    {
        let mut p = Self::zero(modes)?;
        let allowed = if modes == 32 { u32::MAX } else { (1u32 << modes) - 1 };
        for (k, c) in terms {
            let stray = (k.creators | k.annihilators) & !allowed;
            if stray != 0 {
                let site = stray.trailing_zeros() as usize;
                return Err(AlgebraError::SiteOutOfRange { site, modes });
            }
            accumulate(&mut p.terms, k, c);
        }
        Ok(p)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialKey, &R)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<MonomialKey, R> {
        self.terms
    }

    /// Coefficient of a canonical monomial, or zero.
    pub fn coefficient(&self, key: &MonomialKey) -> R {
        self.terms.get(key).cloned().unwrap_or_else(R::zero)
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut out = FermionPolynomial { modes: self.modes, terms: BTreeMap::new() };
        for (k, v) in &self.terms {
            accumulate(&mut out.terms, *k, v.mul(c));
        }
        out
    }

    pub fn map_coefficients<S: CoefficientRing>(&self, f: impl Fn(&R) -> S) -> FermionPolynomial<S> {
        let mut out = FermionPolynomial { modes: self.modes, terms: BTreeMap::new() };
        for (k, v) in &self.terms {
            accumulate(&mut out.terms, *k, f(v));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_modes(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            accumulate(&mut out.terms, *k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(&R::one().neg()))
    }

    fn check_modes(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.modes != other.modes {
            return Err(AlgebraError::ModeMismatch { left: self.modes, right: other.modes });
        }
        Ok(())
    }

    fn mul_ops(&self, ops: &[FieldOp]) -> BTreeMap<MonomialKey, R> {
        let mut current = self.terms.clone();
        for &op in ops {
            let mut next = BTreeMap::new();
            for (k, c) in &current {
                for (nk, neg) in mul_op(*k, op).into_iter().flatten() {
                    accumulate(&mut next, nk, signed(c, neg));
                }
            }
            current = next;
        }
        current
    }

    /// Canonical product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_modes(other)?;
        let mut out = FermionPolynomial { modes: self.modes, terms: BTreeMap::new() };
        for (kq, cq) in &other.terms {
            for (k, c) in self.mul_ops(&kq.ops()) {
                accumulate(&mut out.terms, k, c.mul(cq));
            }
        }
        Ok(out)
    }

    /// `self · other + other · self`.
    pub fn anticommute(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.multiply(other)?.add(&other.multiply(self)?)
    }

    /// Hermitian adjoint. The adjoint of `ψ†_C ψ_A` is `ψ†_{A reversed} ψ_{C
    /// reversed}`; reversing a block of `k` odd operators costs `k(k-1)/2` swaps.
    pub fn adjoint(&self) -> Self {
        let mut out = FermionPolynomial { modes: self.modes, terms: BTreeMap::new() };
        for (k, c) in &self.terms {
            let nc = k.creator_count();
            let na = k.annihilator_count();
            let neg = odd(nc * nc.saturating_sub(1) / 2 + na * na.saturating_sub(1) / 2);
            accumulate(&mut out.terms, MonomialKey::new(k.annihilators, k.creators), signed(&c.conj(), neg));
        }
        out
    }

    /// Relabels site `i` as `perm[i]` and re-canonicalizes.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, AlgebraError> {
        if perm.len() != self.modes {
            return Err(AlgebraError::ModeMismatch { left: self.modes, right: perm.len() });
        }
        let mut out = FermionPolynomial { modes: self.modes, terms: BTreeMap::new() };
        for (k, c) in &self.terms {
            let ops: Vec<FieldOp> =
                k.ops().into_iter().map(|op| FieldOp { site: perm[op.site], dagger: op.dagger }).collect();
            let p = normal_order::<R>(self.modes, &ops, false)?;
            for (nk, nc) in p.terms {
                accumulate(&mut out.terms, nk, nc.mul(c));
            }
        }
        Ok(out)
    }

    /// Group translation: every site `f` becomes `g·f`.
    pub fn translate(&self, g: Element, graph: &CayleyGraph) -> Result<Self, AlgebraError> {
        if graph.site_count() != self.modes {
            return Err(AlgebraError::GraphMismatch { poly: self.modes, graph: graph.site_count() });
        }
        self.relabel(&graph.translation_permutation(g))
    }

    /// Exchanges `ψ_i ↔ ψ†_i` in every monomial, multiplying by `-1` for each
    /// operator when `negate_each` is set, and re-canonicalizes.
    pub fn exchange_roles(&self, negate_each: bool) -> Self {
        let mut out = FermionPolynomial { modes: self.modes, terms: BTreeMap::new() };
        for (k, c) in &self.terms {
            let ops: Vec<FieldOp> = k.ops().into_iter().map(FieldOp::adjoint).collect();
            let neg = negate_each && odd(k.degree());
            let p = normal_order::<R>(self.modes, &ops, neg).expect("sites already validated");
            for (nk, nc) in p.terms {
                accumulate(&mut out.terms, nk, nc.mul(c));
            }
        }
        out
    }

    /// Largest number of field operators in any monomial.
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(MonomialKey::degree).max().unwrap_or(0)
    }
}

/// Canonical form of the product of the given field operators, times `-1`
/// when `negative` is set.
pub fn normal_order<R: CoefficientRing>(
    modes: usize,
    ops: &[FieldOp],
    negative: bool,
) -> Result<FermionPolynomial<R>, AlgebraError> {
    for op in ops {
        if op.site >= modes {
            return Err(AlgebraError::SiteOutOfRange { site: op.site, modes });
        }
    }
    let start = if negative { R::one().neg() } else { R::one() };
    let seed = FermionPolynomial::scalar(modes, start)?;
    Ok(FermionPolynomial { modes, terms: seed.mul_ops(ops) })
}
