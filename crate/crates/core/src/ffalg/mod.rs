//! Exact linear algebra over finite fields: field arithmetic, dense matrices,
//! and canonical subspaces.

mod field;
mod matrix;
mod subspace;

pub use field::{is_prime, Field, FieldElem};
pub use matrix::{family_independent, family_rank, Matrix};
pub use subspace::Subspace;
