//! Linear MDS array codes with optimal-bandwidth repair of systematic nodes.
//!
//! The crate models an `(n, k, ell)` array code by its encoding matrices,
//! checks and executes interference-aligned repair through repairing
//! subspaces, reduces repair schemes to helper-independent operator systems,
//! builds the linear-independence certificate families that bound `k` in
//! terms of `ell`, and searches small parameter spaces exhaustively.
//!
//! Node indices are zero-based throughout the library: systematic nodes are
//! `0..k`, parity node `t` (zero-based) is node `k + t`.

pub mod bounds;
pub mod certificates;
pub mod code;
pub mod error;
pub mod ffalg;
pub mod reduction;
pub mod repair;
pub mod search;

pub use error::{Error, Result};
pub use ffalg::{family_independent, Field, FieldElem, Matrix, Subspace};
