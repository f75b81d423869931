//! Covariant derivatives, composition of symmetrized derivatives and the
//! identity-based simplifier.

pub mod compose;
pub mod deriv;
pub mod identities;

pub use compose::{operator_symbol, polarize, Composer, Dir};
pub use identities::{equal_modulo_identities, simplify_identities};
pub use deriv::{covariant_derivative, derive_along, derive_term, Fresh};
