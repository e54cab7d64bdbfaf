use std::fmt;

use super::field::{Field, FieldElem};
use crate::error::{Error, Result};

/// Dense row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} over {} [", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(field: &Field, n: usize, c: FieldElem) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<FieldElem>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for &v in &data {
            field.check(v)?;
        }
        Ok(Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from rows; `cols` is needed to shape an empty row list.
    pub fn from_rows<R: AsRef<[FieldElem]>>(field: &Field, cols: usize, rows: &[R]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!("row of length {} in a {cols}-column matrix", r.len())));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(field, rows.len(), cols, data)
    }

    pub fn row_vector(field: &Field, v: &[FieldElem]) -> Result<Matrix> {
        Matrix::from_vec(field, 1, v.len(), v.to_vec())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == u64::from(r == c)))
    }

    fn same_field(&self, other: &Matrix) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let idx = i * other.cols + j;
                        out.data[idx] = f.add(out.data[idx], f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix sum of different shapes".into()));
        }
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: FieldElem) -> Matrix {
        let f = &self.field;
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "stacking {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "joining {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for r in rows.clone() {
            data.extend_from_slice(&self.row(r)[cols.clone()]);
        }
        Matrix {
            field: self.field.clone(),
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    /// Reduced row-echelon form in place; returns the pivot columns.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..cols {
            if pr == rows {
                break;
            }
            let Some(sel) = (pr..rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if sel != pr {
                for j in 0..cols {
                    self.data.swap(sel * cols + j, pr * cols + j);
                }
            }
            let inv = f.inv(self.get(pr, c)).expect("pivot is nonzero");
            if inv != 1 {
                for j in c..cols {
                    let idx = pr * cols + j;
                    self.data[idx] = f.mul(self.data[idx], inv);
                }
            }
            for r in 0..rows {
                if r == pr {
                    continue;
                }
                let factor = self.get(r, c);
                if factor == 0 {
                    continue;
                }
                let neg = f.neg(factor);
                for j in c..cols {
                    let pv = self.data[pr * cols + j];
                    if pv != 0 {
                        let idx = r * cols + j;
                        self.data[idx] = f.add(self.data[idx], f.mul(neg, pv));
                    }
                }
            }
            pivots.push(c);
            pr += 1;
        }
        pivots
    }

    /// Reduced row-echelon form and rank.
    pub fn rref(&self) -> (Matrix, usize) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots.len())
    }

    /// RREF with pivot columns.
    pub fn rref_with_pivots(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Basis of {x : self * x = 0}, one vector per row, one per free column.
    pub fn right_kernel(&self) -> Matrix {
        let (red, pivots) = self.rref_with_pivots();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(&self.field, free.len(), self.cols);
        for (row, &fc) in free.iter().enumerate() {
            out.set(row, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                out.set(row, pc, self.field.neg(red.get(pr, fc)));
            }
        }
        out
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(&self.field, n))?;
        let (red, pivots) = aug.rref_with_pivots();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::SingularMatrix);
        }
        Ok(red.submatrix(0..n, n..2 * n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Solves `X * self = rhs` for X, where `self` has full row rank.
    /// Returns `None` when some row of `rhs` lies outside the row space.
    pub fn solve_left(&self, rhs: &Matrix) -> Result<Option<Matrix>> {
        self.same_field(rhs)?;
        if rhs.cols != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} columns, basis has {}",
                rhs.cols, self.cols
            )));
        }
        // Row-reduce [self^T | rhs^T]; each column of the solution is a right
        // solve against self^T.
        let at = self.transpose();
        let bt = rhs.transpose();
        let aug = at.hstack(&bt)?;
        let (red, pivots) = aug.rref_with_pivots();
        let k = self.rows;
        if pivots.iter().any(|&c| c >= k) {
            return Ok(None);
        }
        if pivots.len() != k {
            return Err(Error::DimensionMismatch("basis is not of full row rank".into()));
        }
        // Unique solution: row i of red gives X^T row for pivot i.
        let mut x_t = Matrix::zeros(&self.field, k, rhs.rows);
        for (i, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.rows {
                x_t.set(pc, j, red.get(i, k + j));
            }
        }
        Ok(Some(x_t.transpose()))
    }

    /// Solves `self * x = b` for a square invertible `self`.
    pub fn solve(&self, b: &[FieldElem]) -> Result<Vec<FieldElem>> {
        self.inverse()?.mul_vec(b)
    }

    /// Flattens to a single row of length rows * cols.
    pub fn flatten(&self) -> Vec<FieldElem> {
        self.data.clone()
    }
}

/// True iff the matrices are linearly independent as vectors of the matrix
/// space: flatten each to a row, stack, and compare rank with family size.
pub fn family_independent(mats: &[Matrix]) -> Result<bool> {
    Ok(family_rank(mats)? == mats.len())
}

/// Rank of a family of equally shaped matrices inside the matrix space.
pub fn family_rank(mats: &[Matrix]) -> Result<usize> {
    let Some(first) = mats.first() else {
        return Ok(0);
    };
    let (rows, cols) = (first.rows, first.cols);
    let mut data = Vec::with_capacity(mats.len() * rows * cols);
    for m in mats {
        if m.rows != rows || m.cols != cols {
            return Err(Error::ShapeMismatch(format!(
                "family mixes {rows}x{cols} and {}x{} matrices",
                m.rows, m.cols
            )));
        }
        first.same_field(m)?;
        data.extend_from_slice(&m.data);
    }
    let stacked = Matrix {
        field: first.field.clone(),
        rows: mats.len(),
        cols: rows * cols,
        data,
    };
    Ok(stacked.rank())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> Field {
        Field::prime(2).unwrap()
    }

    fn m(f: &Field, rows: &[&[u64]]) -> Matrix {
        Matrix::from_rows(f, rows[0].len(), rows).unwrap()
    }

    #[test]
    fn rref_examples() {
        let f = gf2();
        let id = Matrix::identity(&f, 2);
        assert_eq!(id.rref(), (id.clone(), 2));
        let a = m(&f, &[&[0, 1], &[1, 1]]);
        assert_eq!(a.rref(), (id, 2));
        let z = Matrix::zeros(&f, 3, 3);
        assert_eq!(z.rref(), (z.clone(), 0));
    }

    #[test]
    fn rref_over_gf7() {
        let f = Field::prime(7).unwrap();
        let a = m(&f, &[&[2, 4, 1], &[1, 2, 5], &[3, 6, 6]]);
        // row 3 = row 1 + row 2, rows 1 and 2 independent
        let (r, rank) = a.rref();
        assert_eq!(rank, 2);
        assert_eq!(r.row(0), &[1, 2, 0]);
        assert_eq!(r.row(1), &[0, 0, 1]);
        assert_eq!(r.row(2), &[0, 0, 0]);
    }

    #[test]
    fn inverse_examples() {
        let f = gf2();
        let a = m(&f, &[&[0, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, m(&f, &[&[1, 1], &[1, 0]]));
        assert!(a.mul(&inv).unwrap().is_identity());
        let id = Matrix::identity(&f, 3);
        assert_eq!(id.inverse().unwrap(), id);
        let s = m(&f, &[&[1, 1], &[1, 1]]);
        assert!(matches!(s.inverse(), Err(Error::SingularMatrix)));
        let rect = Matrix::zeros(&f, 2, 3);
        assert!(matches!(rect.inverse(), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = Matrix::identity(&gf2(), 2);
        let b = Matrix::identity(&Field::prime(3).unwrap(), 2);
        assert!(matches!(a.mul(&b), Err(Error::FieldMismatch)));
        assert!(matches!(family_rank(&[a, b]), Err(Error::FieldMismatch)));
    }

    #[test]
    fn solve_left_recovers_coefficients() {
        let f = Field::prime(5).unwrap();
        let basis = m(&f, &[&[1, 2, 0, 3], &[0, 1, 4, 4]]);
        let coeffs = m(&f, &[&[2, 3], &[4, 0], &[1, 1]]);
        let rhs = coeffs.mul(&basis).unwrap();
        assert_eq!(basis.solve_left(&rhs).unwrap(), Some(coeffs));
        let outside = m(&f, &[&[0, 0, 0, 1]]);
        assert_eq!(basis.solve_left(&outside).unwrap(), None);
    }

    #[test]
    fn family_independence_examples() {
        let f = gf2();
        let id = Matrix::identity(&f, 2);
        let t = m(&f, &[&[1, 1], &[1, 0]]);
        assert!(family_independent(&[id.clone(), t]).unwrap());
        assert!(!family_independent(&[id.clone(), id.clone()]).unwrap());
        // five 2x2 matrices can never be independent
        let mut five = Vec::new();
        for c in 0..4 {
            let mut e = Matrix::zeros(&f, 2, 2);
            e.set(c / 2, c % 2, 1);
            five.push(e);
        }
        assert!(family_independent(&five).unwrap());
        five.push(id);
        assert!(!family_independent(&five).unwrap());
        let wrong = Matrix::zeros(&f, 3, 3);
        assert!(matches!(
            family_independent(&[five[0].clone(), wrong]),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
