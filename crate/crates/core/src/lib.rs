//! Symbolic computation of heat-kernel invariants of Laplace-type operators
//! through the calculus of geometric symbols.
//!
//! The pipeline: composition coefficients of symmetrized covariant derivatives
//! ([`rho_chi`]), the resolvent-symbol recurrence ([`parametrix`]), integration
//! over λ and ξ with traces ([`assemble`]). Results are checked against exact
//! metric jets ([`jetlab`]) and exterior-algebra matrices ([`hodge`]).

pub mod assemble;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod expr;
pub mod hodge;
pub mod jetlab;
pub mod parametrix;
pub mod rational;
pub mod rho_chi;

pub use error::{Error, Result};
pub use rational::Rational;
