//! The `(n, k, ell)` MDS array code model.
//!
//! Systematic node `j < k` stores the data vector `v_j`; parity node `k + t`
//! stores `sum_j A[t][j] * v_j`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ffalg::{Field, FieldElem, Matrix};

/// Largest number of k-subsets `verify_mds` will enumerate.
pub const MAX_MDS_SUBSETS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeParams {
    pub ell: usize,
    pub k: usize,
    pub r: usize,
}

impl CodeParams {
    pub fn new(ell: usize, k: usize, r: usize) -> Result<CodeParams> {
        if ell == 0 || k == 0 || r == 0 {
            return Err(Error::InvalidParams(format!(
                "ell, k and r must be positive (got ell={ell}, k={k}, r={r})"
            )));
        }
        if ell % r != 0 {
            return Err(Error::InvalidParams(format!("r = {r} does not divide ell = {ell}")));
        }
        Ok(CodeParams { ell, k, r })
    }

    pub fn n(&self) -> usize {
        self.k + self.r
    }

    /// Dimension of every repairing subspace, ell / r.
    pub fn repair_dim(&self) -> usize {
        self.ell / self.r
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayCode {
    params: CodeParams,
    field: Field,
    /// `encoding[t][j]` is A_{t,j}.
    encoding: Vec<Vec<Matrix>>,
}

/// The k systematic data vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataFill {
    pub systematic: Vec<Vec<FieldElem>>,
}

/// Outcome of exhaustive MDS verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsReport {
    pub subsets_checked: usize,
    /// Node subsets (sorted, zero-based) whose block matrix is singular.
    pub failing: Vec<Vec<usize>>,
}

impl MdsReport {
    pub fn is_mds(&self) -> bool {
        self.failing.is_empty()
    }

    pub fn passing(&self) -> usize {
        self.subsets_checked - self.failing.len()
    }
}

impl ArrayCode {
    pub fn new(field: &Field, params: CodeParams, encoding: Vec<Vec<Matrix>>) -> Result<ArrayCode> {
        if encoding.len() != params.r {
            return Err(Error::ShapeMismatch(format!(
                "{} parity rows for r = {}",
                encoding.len(),
                params.r
            )));
        }
        for (t, row) in encoding.iter().enumerate() {
            if row.len() != params.k {
                return Err(Error::ShapeMismatch(format!(
                    "parity {t} has {} encoding matrices for k = {}",
                    row.len(),
                    params.k
                )));
            }
            for m in row {
                if m.field() != field {
                    return Err(Error::FieldMismatch);
                }
                if m.rows() != params.ell || m.cols() != params.ell {
                    return Err(Error::ShapeMismatch(format!(
                        "encoding matrix is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        params.ell,
                        params.ell
                    )));
                }
            }
        }
        Ok(ArrayCode {
            params,
            field: field.clone(),
            encoding,
        })
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// A_{t,j}, zero-based parity `t` and systematic node `j`.
    pub fn a(&self, t: usize, j: usize) -> &Matrix {
        &self.encoding[t][j]
    }

    pub fn encoding(&self) -> &[Vec<Matrix>] {
        &self.encoding
    }

    pub fn with_encoding(&self, t: usize, j: usize, m: Matrix) -> Result<ArrayCode> {
        let mut enc = self.encoding.clone();
        enc[t][j] = m;
        ArrayCode::new(&self.field, self.params, enc)
    }

    fn check_data(&self, data: &DataFill) -> Result<()> {
        if data.systematic.len() != self.params.k {
            return Err(Error::ShapeMismatch(format!(
                "{} data vectors for k = {}",
                data.systematic.len(),
                self.params.k
            )));
        }
        for v in &data.systematic {
            if v.len() != self.params.ell {
                return Err(Error::ShapeMismatch(format!(
                    "data vector of length {} for ell = {}",
                    v.len(),
                    self.params.ell
                )));
            }
            for &x in v {
                self.field.check(x)?;
            }
        }
        Ok(())
    }

    /// All n node vectors: the k systematic vectors followed by r parities.
    pub fn encode(&self, data: &DataFill) -> Result<Vec<Vec<FieldElem>>> {
        self.check_data(data)?;
        let f = &self.field;
        let mut nodes = data.systematic.clone();
        for row in &self.encoding {
            let mut parity = vec![0; self.params.ell];
            for (a, v) in row.iter().zip(&data.systematic) {
                for (acc, x) in parity.iter_mut().zip(a.mul_vec(v)?) {
                    *acc = f.add(*acc, x);
                }
            }
            nodes.push(parity);
        }
        Ok(nodes)
    }

    /// The ell x (k ell) block row mapping the stacked data to node `node`.
    fn node_block(&self, node: usize) -> Matrix {
        let CodeParams { ell, k, .. } = self.params;
        let mut block = Matrix::zeros(&self.field, ell, k * ell);
        if node < k {
            for i in 0..ell {
                block.set(i, node * ell + i, 1);
            }
        } else {
            for (j, a) in self.encoding[node - k].iter().enumerate() {
                for r in 0..ell {
                    for c in 0..ell {
                        block.set(r, j * ell + c, a.get(r, c));
                    }
                }
            }
        }
        block
    }

    /// The (k ell) x (k ell) matrix mapping stacked data to the given nodes.
    pub fn selection_matrix(&self, nodes: &[usize]) -> Result<Matrix> {
        let n = self.params.n();
        let mut rows: Option<Matrix> = None;
        for &node in nodes {
            if node >= n {
                return Err(Error::IndexOutOfRange { index: node, len: n });
            }
            let b = self.node_block(node);
            rows = Some(match rows {
                None => b,
                Some(m) => m.vstack(&b)?,
            });
        }
        Ok(rows.unwrap_or_else(|| Matrix::zeros(&self.field, 0, self.params.k * self.params.ell)))
    }

    /// Checks every k-subset of the n nodes for invertibility of its
    /// selection matrix.
    pub fn verify_mds(&self) -> Result<MdsReport> {
        let n = self.params.n();
        let k = self.params.k;
        let count = binomial(n as u64, k as u64);
        if count > MAX_MDS_SUBSETS as u128 {
            return Err(Error::TooManySubsets {
                count,
                cap: MAX_MDS_SUBSETS,
            });
        }
        let subsets = k_subsets(n, k);
        let full = k * self.params.ell;
        let mut failing: Vec<Vec<usize>> = subsets
            .par_iter()
            .filter_map(|s| {
                let m = self.selection_matrix(s).expect("indices in range");
                (m.rank() < full).then(|| s.clone())
            })
            .collect();
        failing.sort();
        Ok(MdsReport {
            subsets_checked: subsets.len(),
            failing,
        })
    }

    /// Recovers the data from any k node vectors.
    pub fn reconstruct(&self, surviving: &[(usize, Vec<FieldElem>)]) -> Result<DataFill> {
        let CodeParams { ell, k, .. } = self.params;
        if surviving.len() != k {
            return Err(Error::ShapeMismatch(format!(
                "{} surviving nodes given, need exactly k = {k}",
                surviving.len()
            )));
        }
        let mut idx: Vec<usize> = surviving.iter().map(|(i, _)| *i).collect();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != k {
            return Err(Error::ShapeMismatch("surviving node indices repeat".into()));
        }
        let nodes: Vec<usize> = surviving.iter().map(|(i, _)| *i).collect();
        let g = self.selection_matrix(&nodes)?;
        let mut y = Vec::with_capacity(k * ell);
        for (_, v) in surviving {
            if v.len() != ell {
                return Err(Error::ShapeMismatch(format!("node vector of length {}", v.len())));
            }
            for &x in v {
                y.push(self.field.check(x)?);
            }
        }
        let x = match g.solve(&y) {
            Ok(x) => x,
            Err(Error::SingularMatrix) => return Err(Error::SingularSystem),
            Err(e) => return Err(e),
        };
        Ok(DataFill {
            systematic: x.chunks(ell).map(|c| c.to_vec()).collect(),
        })
    }
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            break;
        };
        cur[pos] += 1;
        for i in pos + 1..k {
            cur[i] = cur[i - 1] + 1;
        }
    }
    out
}

/// Codes used as worked examples.
pub mod known {
    use super::*;

    fn mat(f: &Field, rows: [[u64; 2]; 2]) -> Matrix {
        Matrix::from_rows(f, 2, &rows).expect("valid literal")
    }

    /// The (4, 2, 2) binary code: parity 1 stores v1 + v2, parity 2 stores
    /// [[0,1],[1,1]] v1 + v2.
    pub fn fig1() -> ArrayCode {
        let f = Field::prime(2).expect("2 is prime");
        let id = Matrix::identity(&f, 2);
        let enc = vec![
            vec![id.clone(), id.clone()],
            vec![mat(&f, [[0, 1], [1, 1]]), id],
        ];
        ArrayCode::new(&f, CodeParams::new(2, 2, 2).expect("valid"), enc).expect("valid code")
    }

    /// The (6, 4, 2) code over GF(7) with parity rows
    /// (a+b+c+d, w+x+y+z) and (a+5w+b+2c+5d, 3w+2b+3x+4y+5z).
    pub fn table1() -> ArrayCode {
        let f = Field::prime(7).expect("7 is prime");
        let id = Matrix::identity(&f, 2);
        let enc = vec![
            vec![id.clone(), id.clone(), id.clone(), id],
            vec![
                mat(&f, [[1, 5], [0, 3]]),
                mat(&f, [[1, 0], [2, 3]]),
                mat(&f, [[2, 0], [0, 4]]),
                mat(&f, [[5, 0], [0, 5]]),
            ],
        ];
        ArrayCode::new(&f, CodeParams::new(2, 4, 2).expect("valid"), enc).expect("valid code")
    }
}
