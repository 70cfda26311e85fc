//! Fermionic cellular automata on Cayley graphs of finite groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: normal-ordered polynomials in `ψ_g`, `ψ†_g` over a pluggable
//!   coefficient ring, with products, anticommutators, adjoints and group
//!   translation.
//! * [`rings`]: exact Gaussian rationals and the symbolic polynomial ring in
//!   which constraint systems are written.
//! * [`groups`]: finite groups by multiplication table, Cayley graphs with
//!   ordered neighbourhood templates, and the wrapping-lemma regularity test.
//! * [`rules`]: local update rules as coefficient tables over monomial
//!   descriptors, the symbolic templates and the known solution families.
//! * [`constraints`]: derivation of the CAR-preservation constraint system,
//!   numeric verification and the linear (quantum-walk) sector.
//! * [`matrixrep`]: the Jordan–Wigner representation, synthesis of the
//!   evolution unitary, the global flip and the named sector blocks.
//! * [`discrimination`]: relative unitaries, eigenvalue polygons and success
//!   probabilities for telling a nonlinear automaton from its linear part.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod constraints;
pub mod discrimination;
pub mod groups;
pub mod linalg;
pub mod matrixrep;
pub mod rings;
pub mod rules;

pub use algebra::{CoefficientRing, FermionPolynomial, FieldOp, MonomialKey};
pub use groups::{CayleyGraph, Element, FiniteGroup};
pub use num_complex::Complex64;
pub use rings::{GaussianRational, SymPoly, Variable};
pub use rules::{LocalRule, MonomialDescriptor};
