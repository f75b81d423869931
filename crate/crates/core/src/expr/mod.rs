//! Abstract-index tensor expressions with exact rational coefficients.

pub mod atom;
pub mod canon;
pub mod index;
pub mod poly;
pub mod render;
pub mod serial;

pub use atom::{Atom, Kind};
pub use canon::Term;
pub use index::{hi, lo, Binding, Index, Label, Variance};
pub use poly::{canonicalize, has_kind, mono, Monomial, TensorPolynomial};
