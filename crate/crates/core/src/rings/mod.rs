//! Exact coefficient rings: Gaussian rationals and symbolic polynomials over
//! them in named variables and their formal conjugates.

mod gaussian;
mod sympoly;

pub use gaussian::GaussianRational;
pub use sympoly::{Monomial, SymPoly, SymbolError, Variable};
