//! Helper-independent operator systems and the reductions that produce them.
//!
//! A [`PhiSystem`] is a list of pairs `(Phi_i, S_i)` with `Phi_i` invertible
//! and `dim S_i = ell / r`. The two-parity conditions ask, for distinct i, j,
//! that `S_i Phi_j = S_i` and `S_i Phi_i ⊕ S_i = F^ell`; the relaxed form
//! used for any r only asks `S_i Phi_i ∩ S_i = {0}`.

use crate::code::{ArrayCode, CodeParams};
use crate::error::{Error, Result};
use crate::ffalg::{Field, Matrix, Subspace};
use crate::repair::{verify_scheme, NodeRepair, RepairScheme};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiPair {
    pub phi: Matrix,
    pub s: Subspace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiSystem {
    field: Field,
    ell: usize,
    r: usize,
    pairs: Vec<PhiPair>,
}

impl PhiSystem {
    /// Validates that every operator is an invertible ell x ell matrix over
    /// `field` and every subspace lives in F^ell with dimension ell / r.
    pub fn new(field: &Field, ell: usize, r: usize, pairs: Vec<PhiPair>) -> Result<PhiSystem> {
        CodeParams::new(ell, 1, r)?;
        for (i, pair) in pairs.iter().enumerate() {
            if pair.phi.field() != field || pair.s.field() != field {
                return Err(Error::FieldMismatch);
            }
            if pair.phi.rows() != ell || pair.phi.cols() != ell {
                return Err(Error::ShapeMismatch(format!(
                    "operator {} is {}x{}, expected {ell}x{ell}",
                    i + 1,
                    pair.phi.rows(),
                    pair.phi.cols()
                )));
            }
            if pair.s.ambient() != ell || pair.s.dim() != ell / r {
                return Err(Error::ShapeMismatch(format!(
                    "subspace {} has dimension {} in F^{}, expected {} in F^{ell}",
                    i + 1,
                    pair.s.dim(),
                    pair.s.ambient(),
                    ell / r
                )));
            }
            if !pair.phi.is_invertible() {
                return Err(Error::SingularMatrix);
            }
        }
        Ok(PhiSystem {
            field: field.clone(),
            ell,
            r,
            pairs,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[PhiPair] {
        &self.pairs
    }

    pub fn phi(&self, i: usize) -> &Matrix {
        &self.pairs[i].phi
    }

    pub fn s(&self, i: usize) -> &Subspace {
        &self.pairs[i].s
    }

    pub fn operators(&self) -> Vec<Matrix> {
        self.pairs.iter().map(|p| p.phi.clone()).collect()
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionViolation {
    /// span(S_i Phi_j) != S_i (or span(S_i A_{t,j}) != S_i in the general form).
    NotInvariant { subspace: usize, operator: usize, parity: Option<usize> },
    /// S_i Phi_i meets S_i nontrivially.
    Intersects { index: usize, dim: usize },
    /// The images of S_i do not sum to F^ell.
    SumNotFull { index: usize, dim: usize },
}

impl std::fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConditionViolation::NotInvariant {
                subspace,
                operator,
                parity: None,
            } => write!(f, "S_{} not invariant under Phi_{}", subspace + 1, operator + 1),
            ConditionViolation::NotInvariant {
                subspace,
                operator,
                parity: Some(t),
            } => write!(f, "S_{} not invariant under A_{{{},{}}}", subspace + 1, t + 1, operator + 1),
            ConditionViolation::Intersects { index, dim } => {
                write!(f, "S_{0} Phi_{0} meets S_{0} in dimension {dim}", index + 1)
            }
            ConditionViolation::SumNotFull { index, dim } => {
                write!(f, "images of S_{} sum to dimension {dim}", index + 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConditionReport {
    pub violations: Vec<ConditionViolation>,
}

impl ConditionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The invariance and trivial-intersection conditions: for distinct i, j,
/// span(S_i Phi_j) = S_i and span(S_i Phi_i) ∩ S_i = {0}.
pub fn check_sc(sys: &PhiSystem) -> ConditionReport {
    let mut violations = Vec::new();
    for i in 0..sys.len() {
        let s = sys.s(i);
        for j in (0..sys.len()).filter(|&j| j != i) {
            if !s.is_invariant(sys.phi(j)).expect("validated shapes") {
                violations.push(ConditionViolation::NotInvariant {
                    subspace: i,
                    operator: j,
                    parity: None,
                });
            }
        }
        let image = s.apply(sys.phi(i)).expect("validated shapes");
        let meet = image.intersect(s).expect("validated shapes");
        if !meet.is_zero() {
            violations.push(ConditionViolation::Intersects { index: i, dim: meet.dim() });
        }
    }
    ConditionReport { violations }
}

/// Helper-independent conditions.
///
/// Without `grid`, checks the two-parity form: for distinct i, j,
/// span(S_i Phi_j) = S_i and span(S_i Phi_i) ⊕ S_i = F^ell (the second
/// parity being the identity). With an r x k encoding grid, checks the
/// general form span(S_i A_{t,j}) = S_i for all t and j != i, and
/// sum_u span(S_i A_{u,i}) = F^ell; the Phi operators are then unused.
pub fn check_constant_conditions(sys: &PhiSystem, grid: Option<&[Vec<Matrix>]>) -> Result<ConditionReport> {
    let ell = sys.ell();
    let k = sys.len();
    let mut violations = Vec::new();
    match grid {
        None => {
            for i in 0..k {
                if 2 * sys.s(i).dim() != ell {
                    return Err(Error::ShapeMismatch(format!(
                        "two-parity form needs dim S_{} = ell/2, got {}",
                        i + 1,
                        sys.s(i).dim()
                    )));
                }
            }
            for i in 0..k {
                let s = sys.s(i);
                for j in (0..k).filter(|&j| j != i) {
                    if !s.is_invariant(sys.phi(j))? {
                        violations.push(ConditionViolation::NotInvariant {
                            subspace: i,
                            operator: j,
                            parity: None,
                        });
                    }
                }
                let image = s.apply(sys.phi(i))?;
                let meet = image.intersect(s)?;
                if !meet.is_zero() {
                    violations.push(ConditionViolation::Intersects { index: i, dim: meet.dim() });
                }
                let sum = image.sum(s)?;
                if !sum.is_full() {
                    violations.push(ConditionViolation::SumNotFull { index: i, dim: sum.dim() });
                }
            }
        }
        Some(grid) => {
            let r = sys.r();
            if grid.len() != r || grid.iter().any(|row| row.len() != k) {
                return Err(Error::ShapeMismatch(format!(
                    "encoding grid must be {r} x {k} to match the system"
                )));
            }
            for row in grid {
                for a in row {
                    if a.field() != sys.field() {
                        return Err(Error::FieldMismatch);
                    }
                    if a.rows() != ell || a.cols() != ell {
                        return Err(Error::ShapeMismatch("encoding matrix of wrong order".into()));
                    }
                }
            }
            for i in 0..k {
                let s = sys.s(i);
                for (t, row) in grid.iter().enumerate() {
                    for j in (0..k).filter(|&j| j != i) {
                        if !s.is_invariant(&row[j])? {
                            violations.push(ConditionViolation::NotInvariant {
                                subspace: i,
                                operator: j,
                                parity: Some(t),
                            });
                        }
                    }
                }
                let mut sum = Subspace::zero(sys.field(), ell);
                for row in grid {
                    sum = sum.sum(&s.apply(&row[i])?)?;
                }
                if !sum.is_full() {
                    violations.push(ConditionViolation::SumNotFull { index: i, dim: sum.dim() });
                }
            }
        }
    }
    Ok(ConditionReport { violations })
}

/// Builds Theta_i = A_{1,i} A_{2,i}^{-1} A_{2,a} A_{1,a}^{-1} for every
/// systematic node i other than the anchor a (default: the last node), paired
/// with S_i = span(S_{i,k+1}). The scheme must repair every systematic node.
/// Pairs are listed in ascending node order.
pub fn theta_reduce(code: &ArrayCode, scheme: &RepairScheme, anchor: Option<usize>) -> Result<PhiSystem> {
    let p = code.params();
    if p.r != 2 {
        return Err(Error::RequiresTwoParities(p.r));
    }
    let anchor = anchor.unwrap_or(p.k - 1);
    if anchor >= p.k {
        return Err(Error::IndexOutOfRange { index: anchor, len: p.k });
    }
    for i in 0..p.k {
        let check = verify_scheme(code, scheme, i).map_err(|e| match e {
            Error::ShapeMismatch(reason) => Error::SchemeInvalid { node: i, reason },
            other => other,
        })?;
        if !check.ok() {
            return Err(Error::SchemeInvalid {
                node: i,
                reason: check
                    .violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
    }
    let inv = |t: usize, j: usize| {
        code.a(t, j)
            .inverse()
            .map_err(|_| Error::SingularEncodingMatrix { parity: t, node: j })
    };
    let tail = code.a(1, anchor).mul(&inv(0, anchor)?)?;
    let mut pairs = Vec::with_capacity(p.k - 1);
    for i in (0..p.k).filter(|&i| i != anchor) {
        let theta = code.a(0, i).mul(&inv(1, i)?)?.mul(&tail)?;
        let s = Subspace::span(scheme.get(i).expect("verified").helper(p.k).expect("verified"));
        pairs.push(PhiPair { phi: theta, s });
    }
    let sys = PhiSystem::new(code.field(), p.ell, 2, pairs)?;
    let report = check_sc(&sys);
    if !report.ok() {
        return Err(Error::DerivedSystemInvalid(
            report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ));
    }
    Ok(sys)
}

/// Result of re-coordinatizing a code so that the second parity's encoding
/// matrices are all the identity.
#[derive(Clone, Debug)]
pub struct NormalizedCode {
    pub code: ArrayCode,
    /// A_{2,j}^{-1}: node j's new data w_j relates to the old by v_j = D_j w_j.
    pub coordinate_change: Vec<Matrix>,
    /// Phi_j = new A_{1,j}.
    pub phis: Vec<Matrix>,
}

/// Substitutes w_j = A_{2,j} v_j for each systematic node, so the new
/// encoding matrices are A_{t,j} A_{2,j}^{-1} and the second parity row
/// becomes the identity. The first parity row is relabelled as Phi_j.
pub fn normalize_identity_parity(code: &ArrayCode) -> Result<NormalizedCode> {
    let p = code.params();
    if p.r < 2 {
        return Err(Error::InvalidParams("normalization needs at least two parities".into()));
    }
    let coordinate_change = (0..p.k)
        .map(|j| {
            code.a(1, j)
                .inverse()
                .map_err(|_| Error::SingularEncodingMatrix { parity: 1, node: j })
        })
        .collect::<Result<Vec<_>>>()?;
    let encoding = code
        .encoding()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&coordinate_change)
                .map(|(a, d)| a.mul(d))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let phis = encoding[0].clone();
    Ok(NormalizedCode {
        code: ArrayCode::new(code.field(), p, encoding)?,
        coordinate_change,
        phis,
    })
}

impl NormalizedCode {
    /// Maps a repair scheme of the original code to the normalized one:
    /// systematic helper j transmits S_{i,j} v_j = S_{i,j} D_j w_j.
    pub fn transform_scheme(&self, scheme: &RepairScheme) -> Result<RepairScheme> {
        let k = self.code.params().k;
        let mut out = RepairScheme::default();
        for repair in scheme.nodes.values() {
            let helpers = repair
                .helpers
                .iter()
                .enumerate()
                .map(|(j, h)| match h {
                    Some(m) if j < k => m.mul(&self.coordinate_change[j]).map(Some),
                    other => Ok(other.clone()),
                })
                .collect::<Result<Vec<_>>>()?;
            out.insert(NodeRepair {
                failed: repair.failed,
                helpers,
            });
        }
        Ok(out)
    }
}
