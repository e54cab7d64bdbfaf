use std::cmp::Ordering;

use super::field::{Field, FieldElem};
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// A subspace of the row space F^ambient, stored as its canonical basis: the
/// nonzero rows of the reduced row-echelon form. Two subspaces are equal
/// exactly when their bases are identical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: Matrix,
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "span{:?}", self.basis.to_rows())
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: ambient dimension, then dimension, then the flattened
/// RREF basis compared lexicographically.
impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient()
            .cmp(&other.ambient())
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.basis.data().cmp(other.basis.data()))
    }
}

impl Subspace {
    /// Row span of `m`.
    pub fn span(m: &Matrix) -> Subspace {
        let (red, rank) = m.rref();
        Subspace {
            basis: red.submatrix(0..rank, 0..m.cols()),
        }
    }

    pub fn from_rows<R: AsRef<[FieldElem]>>(field: &Field, ambient: usize, rows: &[R]) -> Result<Subspace> {
        Ok(Subspace::span(&Matrix::from_rows(field, ambient, rows)?))
    }

    pub fn zero(field: &Field, ambient: usize) -> Subspace {
        Subspace {
            basis: Matrix::zeros(field, 0, ambient),
        }
    }

    pub fn full(field: &Field, ambient: usize) -> Subspace {
        Subspace {
            basis: Matrix::identity(field, ambient),
        }
    }

    /// Span of the first `dim` coordinate vectors.
    pub fn coordinate(field: &Field, ambient: usize, dim: usize) -> Subspace {
        let mut basis = Matrix::zeros(field, dim, ambient);
        for i in 0..dim {
            basis.set(i, i, 1);
        }
        Subspace { basis }
    }

    /// Wraps a matrix already known to be in RREF with no zero rows.
    pub(crate) fn from_rref_unchecked(basis: Matrix) -> Subspace {
        debug_assert_eq!(basis.rank(), basis.rows());
        Subspace { basis }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient()
    }

    fn compatible(&self, other: &Subspace) -> Result<()> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch);
        }
        if self.ambient() != other.ambient() {
            return Err(Error::AmbientMismatch(self.ambient(), other.ambient()));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.compatible(other)?;
        Ok(Subspace::span(&self.basis.vstack(&other.basis)?))
    }

    /// Intersection by the Zassenhaus construction: row-reduce
    /// `[[A, A], [B, 0]]`; rows whose left half vanishes carry a basis of
    /// A ∩ B in their right half.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.compatible(other)?;
        let n = self.ambient();
        let field = self.field();
        let top = self.basis.hstack(&self.basis)?;
        let bottom = other.basis.hstack(&Matrix::zeros(field, other.dim(), n))?;
        let (red, pivots) = top.vstack(&bottom)?.rref_with_pivots();
        let first = pivots.iter().position(|&c| c >= n).unwrap_or(pivots.len());
        let rows = first..pivots.len();
        // In RREF the block below the left pivots is already reduced, so the
        // right halves of these rows are the canonical basis.
        let basis = red.submatrix(rows, n..2 * n);
        Ok(Subspace::from_rref_unchecked(basis))
    }

    /// Image under right multiplication: span(basis * m).
    pub fn apply(&self, m: &Matrix) -> Result<Subspace> {
        if m.rows() != self.ambient() || m.cols() != self.ambient() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a subspace of F^{}",
                m.rows(),
                m.cols(),
                self.ambient()
            )));
        }
        Ok(Subspace::span(&self.basis.mul(m)?))
    }

    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        Ok(self.sum(other)?.dim() == self.dim())
    }

    /// True when the two subspaces intersect only in zero.
    pub fn meets_trivially(&self, other: &Subspace) -> Result<bool> {
        self.compatible(other)?;
        Ok(self.dim() + other.dim() == self.sum(other)?.dim())
    }

    /// Invariance under an operator: span(S * m) = S. For invertible `m` this
    /// is equivalent to S * m ⊆ S.
    pub fn is_invariant(&self, m: &Matrix) -> Result<bool> {
        Ok(self.apply(m)? == *self)
    }
}
