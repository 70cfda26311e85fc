use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{CoefficientRing, ToComplex};

/// An element `re + i·im` of `ℚ(i)` with arbitrary-precision parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new_integers(n, 0)
    }

    pub fn new_integers(re: i64, im: i64) -> Self {
        GaussianRational {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    /// Builds `num/den + i·num_i/den_i`. Returns `None` for a zero denominator.
    pub fn from_fractions(num: i64, den: i64, num_i: i64, den_i: i64) -> Option<Self> {
        if den == 0 || den_i == 0 {
            return None;
        }
        Some(GaussianRational {
            re: BigRational::new(num.into(), den.into()),
            im: BigRational::new(num_i.into(), den_i.into()),
        })
    }

    pub fn i() -> Self {
        Self::new_integers(0, 1)
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(GaussianRational { re: &self.re / &norm, im: -(&self.im / &norm) })
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    /// `(num, den, num_i, den_i)` when all four fit in `i64`.
    pub fn to_fractions(&self) -> Option<(i64, i64, i64, i64)> {
        Some((
            self.re.numer().to_i64()?,
            self.re.denom().to_i64()?,
            self.im.numer().to_i64()?,
            self.im.denom().to_i64()?,
        ))
    }
}

impl CoefficientRing for GaussianRational {
    fn zero() -> Self {
        GaussianRational { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        GaussianRational { re: BigRational::one(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        GaussianRational { re: &self.re + &other.re, im: &self.im + &other.im }
    }
    fn mul(&self, other: &Self) -> Self {
        GaussianRational {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }
    fn neg(&self) -> Self {
        GaussianRational { re: -&self.re, im: -&self.im }
    }
    fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -&self.im }
    }
}

impl ToComplex for GaussianRational {
    fn to_complex(&self) -> Option<Complex64> {
        Some(self.to_complex64())
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({}{}{}i)", self.re, sign, self.im.abs())
            }
        }
    }
}
