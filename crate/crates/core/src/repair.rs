//! Repairing-subspace schemes: verification against the alignment and
//! full-rank conditions, and exact repair of a failed systematic node from
//! all n - 1 helpers.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::code::{ArrayCode, CodeParams};
use crate::error::{Error, Result};
use crate::ffalg::{FieldElem, Matrix, Subspace};

/// Repair of one failed systematic node: one (ell/r) x ell transmission
/// matrix per helper. The rows of each matrix are exactly what the helper
/// multiplies its stored vector by, so two schemes with equal spans but
/// different bases repair identically yet transmit different symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRepair {
    pub failed: usize,
    /// Indexed by helper node; the entry for `failed` is `None`.
    pub helpers: Vec<Option<Matrix>>,
}

impl NodeRepair {
    pub fn helper(&self, j: usize) -> Option<&Matrix> {
        self.helpers.get(j).and_then(|m| m.as_ref())
    }

    /// Builds a repair from subspaces by using their canonical bases.
    pub fn from_subspaces(failed: usize, subspaces: Vec<Option<Subspace>>) -> NodeRepair {
        NodeRepair {
            failed,
            helpers: subspaces
                .into_iter()
                .map(|s| s.map(|s| s.basis().clone()))
                .collect(),
        }
    }
}

/// Repairs for some or all systematic nodes, keyed by the failed node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairScheme {
    pub nodes: BTreeMap<usize, NodeRepair>,
}

impl RepairScheme {
    pub fn insert(&mut self, repair: NodeRepair) {
        self.nodes.insert(repair.failed, repair);
    }

    pub fn get(&self, failed: usize) -> Option<&NodeRepair> {
        self.nodes.get(&failed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A transmission matrix does not have rank ell / r.
    Rank { helper: usize, rank: usize },
    /// span(S_{i,j}) != span(S_{i,k+t} A_{t,j}) for systematic helper j.
    Alignment { helper: usize, parity: usize },
    /// The r images S_{i,k+t} A_{t,i} sum to a proper subspace.
    DeficientSum { dim: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Rank { helper, rank } => write!(f, "helper {} has rank {rank}", helper + 1),
            Violation::Alignment { helper, parity } => {
                write!(f, "alignment fails at helper {}, parity {}", helper + 1, parity + 1)
            }
            Violation::DeficientSum { dim } => write!(f, "parity images sum to dimension {dim}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeCheck {
    pub failed: usize,
    pub violations: Vec<Violation>,
}

impl SchemeCheck {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// What the replacement node receives and rebuilds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairTranscript {
    pub failed: usize,
    /// (helper index, transmitted vector of length ell / r), ascending helpers.
    pub transmissions: Vec<(usize, Vec<FieldElem>)>,
    pub recovered: Vec<FieldElem>,
    pub total_symbols: usize,
}

/// Optimal repair bandwidth (n - 1) ell / r in symbols.
pub fn bandwidth_of(params: CodeParams) -> Ratio<u64> {
    Ratio::new(((params.n() - 1) * params.ell) as u64, params.r as u64)
}

fn check_shapes(code: &ArrayCode, repair: &NodeRepair, i: usize) -> Result<()> {
    let p = code.params();
    if i >= p.k {
        return Err(Error::IndexOutOfRange { index: i, len: p.k });
    }
    if repair.failed != i {
        return Err(Error::ShapeMismatch(format!(
            "repair entry is for node {}, not {}",
            repair.failed + 1,
            i + 1
        )));
    }
    if repair.helpers.len() != p.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} helper entries for n = {}",
            repair.helpers.len(),
            p.n()
        )));
    }
    for (j, h) in repair.helpers.iter().enumerate() {
        match (j == i, h) {
            (true, None) => {}
            (true, Some(_)) => {
                return Err(Error::ShapeMismatch(format!("failed node {} has a helper matrix", i + 1)))
            }
            (false, None) => {
                return Err(Error::ShapeMismatch(format!("helper {} has no matrix", j + 1)))
            }
            (false, Some(m)) => {
                if m.field() != code.field() {
                    return Err(Error::FieldMismatch);
                }
                if m.rows() != p.repair_dim() || m.cols() != p.ell {
                    return Err(Error::ShapeMismatch(format!(
                        "helper {} matrix is {}x{}, expected {}x{}",
                        j + 1,
                        m.rows(),
                        m.cols(),
                        p.repair_dim(),
                        p.ell
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Checks the repair of failed node `i` against the alignment condition
/// span(S_{i,j}) = span(S_{i,k+t} A_{t,j}) for systematic helpers and the
/// full-rank condition sum_t span(S_{i,k+t} A_{t,i}) = F^ell.
pub fn verify_scheme(code: &ArrayCode, scheme: &RepairScheme, i: usize) -> Result<SchemeCheck> {
    let repair = scheme
        .get(i)
        .ok_or_else(|| Error::ShapeMismatch(format!("scheme has no entry for node {}", i + 1)))?;
    verify_node_repair(code, repair, i)
}

pub fn verify_node_repair(code: &ArrayCode, repair: &NodeRepair, i: usize) -> Result<SchemeCheck> {
    check_shapes(code, repair, i)?;
    let p = code.params();
    let mut violations = Vec::new();
    for (j, h) in repair.helpers.iter().enumerate() {
        if let Some(m) = h {
            let rank = m.rank();
            if rank != p.repair_dim() {
                violations.push(Violation::Rank { helper: j, rank });
            }
        }
    }
    let parity = |t: usize| Subspace::span(repair.helper(p.k + t).expect("checked"));
    for j in (0..p.k).filter(|&j| j != i) {
        let sj = Subspace::span(repair.helper(j).expect("checked"));
        for t in 0..p.r {
            if parity(t).apply(code.a(t, j))? != sj {
                violations.push(Violation::Alignment { helper: j, parity: t });
            }
        }
    }
    let mut sum = Subspace::zero(code.field(), p.ell);
    for t in 0..p.r {
        sum = sum.sum(&parity(t).apply(code.a(t, i))?)?;
    }
    if !sum.is_full() {
        violations.push(Violation::DeficientSum { dim: sum.dim() });
    }
    Ok(SchemeCheck { failed: i, violations })
}

/// Repairs systematic node `i` from the other n - 1 nodes. `nodes` holds all
/// n stored vectors; the entry at `i` is ignored.
///
/// Each helper j sends S_{i,j} v_j. Parity t's contribution carries
/// interference sum_{j != i} S_{i,k+t} A_{t,j} v_j, which is cancelled with
/// C_{j,t} S_{i,j} v_j where S_{i,k+t} A_{t,j} = C_{j,t} S_{i,j}. The residues
/// stack to (S_{i,k+t} A_{t,i})_t v_i, an invertible ell x ell system.
pub fn execute_repair(
    code: &ArrayCode,
    scheme: &RepairScheme,
    i: usize,
    nodes: &[Vec<FieldElem>],
) -> Result<RepairTranscript> {
    let check = verify_scheme(code, scheme, i)?;
    if !check.ok() {
        let reason = check
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::SchemeInvalid { node: i, reason });
    }
    let repair = scheme.get(i).expect("verified");
    let p = code.params();
    let f = code.field();
    if nodes.len() != p.n() {
        return Err(Error::ShapeMismatch(format!("{} node vectors for n = {}", nodes.len(), p.n())));
    }
    for (j, v) in nodes.iter().enumerate() {
        if j != i && v.len() != p.ell {
            return Err(Error::ShapeMismatch(format!("node {} has length {}", j + 1, v.len())));
        }
    }

    let mut transmissions = Vec::with_capacity(p.n() - 1);
    let mut sent: Vec<Option<Vec<FieldElem>>> = vec![None; p.n()];
    for j in (0..p.n()).filter(|&j| j != i) {
        let y = repair.helper(j).expect("verified").mul_vec(&nodes[j])?;
        transmissions.push((j, y.clone()));
        sent[j] = Some(y);
    }

    let mut system_rows: Option<Matrix> = None;
    let mut rhs = Vec::with_capacity(p.ell);
    for t in 0..p.r {
        let s_par = repair.helper(p.k + t).expect("verified");
        let mut residue = sent[p.k + t].clone().expect("parity helper sent");
        for j in (0..p.k).filter(|&j| j != i) {
            let projected = s_par.mul(code.a(t, j))?;
            let s_j = repair.helper(j).expect("verified");
            let change = s_j.solve_left(&projected)?.ok_or_else(|| Error::SchemeInvalid {
                node: i,
                reason: format!("no change of basis at helper {}, parity {}", j + 1, t + 1),
            })?;
            let interference = change.mul_vec(sent[j].as_ref().expect("sent"))?;
            for (r, x) in residue.iter_mut().zip(interference) {
                *r = f.sub(*r, x);
            }
        }
        let block = s_par.mul(code.a(t, i))?;
        system_rows = Some(match system_rows {
            None => block,
            Some(m) => m.vstack(&block)?,
        });
        rhs.extend(residue);
    }
    let system = system_rows.expect("r >= 1");
    let recovered = system.solve(&rhs).map_err(|_| Error::SchemeInvalid {
        node: i,
        reason: "stacked parity images are singular".into(),
    })?;

    // The parities must agree with the systematic data once v_i is restored.
    let mut full = nodes.to_vec();
    full[i] = recovered.clone();
    let data = crate::code::DataFill {
        systematic: full[..p.k].to_vec(),
    };
    let expected = code.encode(&data)?;
    if let Some(t) = (0..p.r).find(|&t| expected[p.k + t] != nodes[p.k + t]) {
        return Err(Error::InconsistentNodeData { node: p.k + t });
    }

    let total_symbols = transmissions.iter().map(|(_, v)| v.len()).sum();
    Ok(RepairTranscript {
        failed: i,
        transmissions,
        recovered,
        total_symbols,
    })
}
