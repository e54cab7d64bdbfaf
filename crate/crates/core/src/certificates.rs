//! Linear-independence certificates built from an operator system.
//!
//! Each builder multiplies operators of a [`PhiSystem`] into a family of
//! ell x ell matrices whose independence in the ell^2-dimensional matrix
//! space caps the number of pairs. Builders whose family is guaranteed
//! independent by the subspace conditions re-check that claim and return
//! [`Error::DependentFamily`] with the whole family when it fails. All
//! products run left to right in the listed index order.

use std::collections::BTreeSet;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::ffalg::{family_rank, Matrix, Subspace};
use crate::reduction::PhiSystem;

/// Largest family the builders will enumerate.
pub const MAX_FAMILY: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    T,
    Upsilon,
    R,
    Lambda,
    Gamma,
    IdentityTheta,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::T => "T",
            FamilyKind::Upsilon => "UPSILON",
            FamilyKind::R => "R",
            FamilyKind::Lambda => "LAMBDA",
            FamilyKind::Gamma => "GAMMA",
            FamilyKind::IdentityTheta => "IDENTITY_THETA",
        }
    }
}

/// How a member was formed; indices are zero-based positions in the system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MemberLabel {
    Identity,
    Operator(usize),
    /// Phi_i Phi_j.
    Pair(usize, usize),
    /// Product over the chosen blocks, one bit per block.
    Bits(Vec<bool>),
    /// Omega (a T member labelled by its pair, or `None` for the identity)
    /// times an Upsilon product.
    Scaled { omega: Option<(usize, usize)>, bits: Vec<bool> },
    /// Phi_{i_1} ... Phi_{i_t}.
    Tuple(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub matrix: Matrix,
    pub label: MemberLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateFamily {
    pub kind: FamilyKind,
    pub members: Vec<Member>,
    /// Expected cardinality.
    pub claim: usize,
}

impl CertificateFamily {
    pub fn matrices(&self) -> Vec<Matrix> {
        self.members.iter().map(|m| m.matrix.clone()).collect()
    }

    pub fn rank(&self) -> Result<usize> {
        family_rank(&self.matrices())
    }

    pub fn is_independent(&self) -> Result<bool> {
        Ok(self.rank()? == self.members.len())
    }

    /// Returns the family if it is independent, otherwise a
    /// `DependentFamily` error carrying it.
    fn certified(self) -> Result<CertificateFamily> {
        let rank = self.rank()?;
        if rank == self.members.len() {
            Ok(self)
        } else {
            Err(Error::DependentFamily {
                kind: self.kind.name(),
                rank,
                family: Box::new(self),
            })
        }
    }
}

fn product<'a>(sys: &PhiSystem, factors: impl IntoIterator<Item = &'a Matrix>) -> Result<Matrix> {
    let mut acc = Matrix::identity(sys.field(), sys.ell());
    for f in factors {
        acc = acc.mul(f)?;
    }
    Ok(acc)
}

/// The 2^n bit vectors in lexicographic order.
fn bit_vectors(n: usize) -> Result<Vec<Vec<bool>>> {
    if n >= 64 || (1u64 << n) > MAX_FAMILY {
        return Err(Error::TooLarge {
            size: 1u128 << n.min(127),
            cap: MAX_FAMILY,
        });
    }
    Ok((0..1u64 << n)
        .map(|c| (0..n).map(|j| (c >> (n - 1 - j)) & 1 == 1).collect())
        .collect())
}

fn check_pairs(sys: &PhiSystem, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &(a, b) in pairs {
        sys.check_index(a)?;
        sys.check_index(b)?;
        for x in [a, b] {
            if !seen.insert(x) {
                return Err(Error::PairsOverlap(x));
            }
        }
    }
    for &(a, b) in pairs {
        if !sys.s(a).meets_trivially(sys.s(b))? {
            return Err(Error::PairsNotComplementary(a, b));
        }
    }
    Ok(())
}

/// Products of paired operators prod_j (Phi_{a_j} Phi_{b_j})^{e_j}.
fn upsilon_products(sys: &PhiSystem, pairs: &[(usize, usize)]) -> Result<Vec<(Vec<bool>, Matrix)>> {
    let pair_products = pairs
        .iter()
        .map(|&(a, b)| sys.phi(a).mul(sys.phi(b)))
        .collect::<Result<Vec<_>>>()?;
    bit_vectors(pairs.len())?
        .into_iter()
        .map(|bits| {
            let m = product(
                sys,
                bits.iter().zip(&pair_products).filter(|(b, _)| **b).map(|(_, m)| m),
            )?;
            Ok((bits, m))
        })
        .collect()
}

/// {I, Phi_1, ..., Phi_K}: independent whenever the system satisfies the
/// invariance and trivial-intersection conditions.
pub fn build_identity_theta(sys: &PhiSystem) -> Result<CertificateFamily> {
    let mut members = vec![Member {
        matrix: Matrix::identity(sys.field(), sys.ell()),
        label: MemberLabel::Identity,
    }];
    members.extend(sys.pairs().iter().enumerate().map(|(i, p)| Member {
        matrix: p.phi.clone(),
        label: MemberLabel::Operator(i),
    }));
    let claim = members.len();
    CertificateFamily {
        kind: FamilyKind::IdentityTheta,
        members,
        claim,
    }
    .certified()
}

/// T = {Phi_i Phi_j : i in `odd`, j in `even`}, in row-major order. T can be
/// dependent, so no independence is asserted here; see [`check_corollary1`].
pub fn build_t(sys: &PhiSystem, odd: &[usize], even: &[usize]) -> Result<CertificateFamily> {
    let mut seen = BTreeSet::new();
    for &i in odd.iter().chain(even) {
        sys.check_index(i)?;
        if !seen.insert(i) {
            return Err(Error::OverlappingSets(i));
        }
    }
    if odd.len() != even.len() {
        return Err(Error::UnequalParts);
    }
    let mut members = Vec::with_capacity(odd.len() * even.len());
    for &i in odd {
        for &j in even {
            members.push(Member {
                matrix: sys.phi(i).mul(sys.phi(j))?,
                label: MemberLabel::Pair(i, j),
            });
        }
    }
    Ok(CertificateFamily {
        kind: FamilyKind::T,
        claim: odd.len() * even.len(),
        members,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corollary1Check {
    /// Every pair in the family has S_i ∩ S_j != {0}.
    pub hypothesis: bool,
    pub independent: bool,
    /// When dependent: a pair (i, j) whose product lies in the span of the
    /// other members. Such a pair must have complementary subspaces.
    pub witness: Option<(usize, usize)>,
}

impl Corollary1Check {
    /// Hypothesis implies independence.
    pub fn holds(&self) -> bool {
        !self.hypothesis || self.independent
    }
}

/// If every pair (i, j) of a T family has S_i ∩ S_j != {0}, the family must
/// be independent.
pub fn check_corollary1(sys: &PhiSystem, family: &CertificateFamily) -> Result<Corollary1Check> {
    if family.kind != FamilyKind::T {
        return Err(Error::PreconditionFailed(format!(
            "corollary check needs a T family, got {}",
            family.kind.name()
        )));
    }
    let mut hypothesis = true;
    for m in &family.members {
        let MemberLabel::Pair(i, j) = m.label else {
            return Err(Error::PreconditionFailed("T member without a pair label".into()));
        };
        sys.check_index(i)?;
        sys.check_index(j)?;
        if sys.s(i).intersect(sys.s(j))?.is_zero() {
            hypothesis = false;
        }
    }
    let mats = family.matrices();
    let rank = family_rank(&mats)?;
    let independent = rank == mats.len();
    let mut witness = None;
    if !independent {
        for (idx, m) in family.members.iter().enumerate() {
            let others: Vec<Matrix> = mats
                .iter()
                .enumerate()
                .filter(|(o, _)| *o != idx)
                .map(|(_, m)| m.clone())
                .collect();
            if family_rank(&others)? == rank {
                if let MemberLabel::Pair(i, j) = m.label {
                    witness = Some((i, j));
                    break;
                }
            }
        }
    }
    Ok(Corollary1Check {
        hypothesis,
        independent,
        witness,
    })
}

/// Upsilon_e = prod_j (Phi_{a_j} Phi_{b_j})^{e_j} over disjoint pairs with
/// S_{a_j} ∩ S_{b_j} = {0}; 2^n independent matrices.
pub fn build_upsilon(sys: &PhiSystem, pairs: &[(usize, usize)]) -> Result<CertificateFamily> {
    check_pairs(sys, pairs)?;
    let members = upsilon_products(sys, pairs)?
        .into_iter()
        .map(|(bits, matrix)| Member {
            matrix,
            label: MemberLabel::Bits(bits),
        })
        .collect::<Vec<_>>();
    CertificateFamily {
        kind: FamilyKind::Upsilon,
        claim: 1 << pairs.len(),
        members,
    }
    .certified()
}

/// R = {Omega Upsilon_e : Omega in T, e in {0,1}^n}, where the complementary
/// pairs are disjoint from T's indices and no pair of T has complementary
/// subspaces. An empty T stands for {I}, which makes R the Upsilon family.
pub fn build_r(sys: &PhiSystem, pairs: &[(usize, usize)], t_family: &CertificateFamily) -> Result<CertificateFamily> {
    check_pairs(sys, pairs)?;
    if t_family.kind != FamilyKind::T {
        return Err(Error::PreconditionFailed("R needs a T family".into()));
    }
    let paired: BTreeSet<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut omegas: Vec<(Option<(usize, usize)>, Matrix)> = Vec::new();
    for m in &t_family.members {
        let MemberLabel::Pair(i, j) = m.label else {
            return Err(Error::PreconditionFailed("T member without a pair label".into()));
        };
        for x in [i, j] {
            sys.check_index(x)?;
            if paired.contains(&x) {
                return Err(Error::IndexClash(x));
            }
        }
        if sys.s(i).intersect(sys.s(j))?.is_zero() {
            return Err(Error::PreconditionFailed(format!(
                "T pair ({}, {}) has complementary subspaces",
                i + 1,
                j + 1
            )));
        }
        omegas.push((Some((i, j)), m.matrix.clone()));
    }
    if omegas.is_empty() {
        omegas.push((None, Matrix::identity(sys.field(), sys.ell())));
    }
    let ups = upsilon_products(sys, pairs)?;
    let mut members = Vec::with_capacity(omegas.len() * ups.len());
    for (omega, om) in &omegas {
        for (bits, u) in &ups {
            members.push(Member {
                matrix: om.mul(u)?,
                label: MemberLabel::Scaled {
                    omega: *omega,
                    bits: bits.clone(),
                },
            });
        }
    }
    CertificateFamily {
        kind: FamilyKind::R,
        claim: omegas.len() << pairs.len(),
        members,
    }
    .certified()
}

fn check_disjoint_parts(sys: &PhiSystem, parts: &[Vec<usize>]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (p, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::PartitionInvalid(format!("part {} is empty", p + 1)));
        }
        for &i in part {
            sys.check_index(i)?;
            if !seen.insert(i) {
                return Err(Error::PartitionInvalid(format!("index {} appears twice", i + 1)));
            }
        }
    }
    Ok(())
}

/// Lambda_i = ascending product of Phi over part X_i, each part's subspaces
/// summing to F^ell; the 2^n products prod_i Lambda_i^{e_i} are independent.
/// The parts must be disjoint; they need not cover the whole system.
pub fn build_lambda(sys: &PhiSystem, partition: &[Vec<usize>]) -> Result<CertificateFamily> {
    check_disjoint_parts(sys, partition)?;
    let mut lambdas = Vec::with_capacity(partition.len());
    for (p, part) in partition.iter().enumerate() {
        let mut sorted = part.clone();
        sorted.sort_unstable();
        let mut sum = Subspace::zero(sys.field(), sys.ell());
        for &i in &sorted {
            sum = sum.sum(sys.s(i))?;
        }
        if !sum.is_full() {
            return Err(Error::SumNotFull {
                part: p,
                dim: sum.dim(),
                ell: sys.ell(),
            });
        }
        lambdas.push(product(sys, sorted.iter().map(|&i| sys.phi(i)))?);
    }
    let members = bit_vectors(lambdas.len())?
        .into_iter()
        .map(|bits| {
            let matrix = product(
                sys,
                bits.iter().zip(&lambdas).filter(|(b, _)| **b).map(|(_, m)| m),
            )?;
            Ok(Member {
                matrix,
                label: MemberLabel::Bits(bits),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CertificateFamily {
        kind: FamilyKind::Lambda,
        claim: 1 << partition.len(),
        members,
    }
    .certified()
}

/// Gamma = tuples (i_1..i_t) in O_1 x ... x O_t whose subspaces share a
/// nonzero vector; the products Phi_{i_1} ... Phi_{i_t} are independent.
/// Tuples are enumerated lexicographically by position within each part.
pub fn build_gamma(sys: &PhiSystem, partition: &[Vec<usize>]) -> Result<CertificateFamily> {
    check_disjoint_parts(sys, partition)?;
    let Some(first) = partition.first() else {
        return Err(Error::PartitionInvalid("no parts".into()));
    };
    let size = first.len();
    if partition.iter().any(|p| p.len() != size) {
        return Err(Error::UnequalParts);
    }
    let total = (size as u128).checked_pow(partition.len() as u32).unwrap_or(u128::MAX);
    if total > MAX_FAMILY as u128 {
        return Err(Error::TooLarge {
            size: total,
            cap: MAX_FAMILY,
        });
    }
    let t = partition.len();
    let mut members = Vec::new();
    let mut pos = vec![0usize; t];
    loop {
        let tuple: Vec<usize> = pos.iter().zip(partition).map(|(&p, part)| part[p]).collect();
        let mut meet = sys.s(tuple[0]).clone();
        for &i in &tuple[1..] {
            if meet.is_zero() {
                break;
            }
            meet = meet.intersect(sys.s(i))?;
        }
        if !meet.is_zero() {
            members.push(Member {
                matrix: product(sys, tuple.iter().map(|&i| sys.phi(i)))?,
                label: MemberLabel::Tuple(tuple),
            });
        }
        let Some(d) = (0..t).rev().find(|&d| pos[d] + 1 < size) else {
            break;
        };
        pos[d] += 1;
        for p in pos.iter_mut().skip(d + 1) {
            *p = 0;
        }
    }
    let claim = members.len();
    CertificateFamily {
        kind: FamilyKind::Gamma,
        members,
        claim,
    }
    .certified()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumDimCheck {
    pub dim: usize,
    pub bound: usize,
    pub ok: bool,
}

/// ceil((1 - ((r-1)/r)^n) ell) for n subspaces.
pub fn sum_dim_bound(ell: usize, r: usize, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let num = BigUint::from(ell) * BigUint::from(r - 1).pow(n as u32);
    let den = BigUint::from(r).pow(n as u32);
    let shortfall: BigUint = num / den;
    ell - usize::try_from(shortfall).expect("shortfall below ell")
}

/// Dimension of S_{i_1} + ... + S_{i_n} against its lower bound. Indices
/// must be distinct.
pub fn sum_dim_check(sys: &PhiSystem, indices: &[usize]) -> Result<SumDimCheck> {
    let mut seen = BTreeSet::new();
    let mut sum = Subspace::zero(sys.field(), sys.ell());
    for &i in indices {
        sys.check_index(i)?;
        if !seen.insert(i) {
            return Err(Error::PreconditionFailed(format!("index {} repeats", i + 1)));
        }
        sum = sum.sum(sys.s(i))?;
    }
    let bound = sum_dim_bound(sys.ell(), sys.r(), indices.len());
    Ok(SumDimCheck {
        dim: sum.dim(),
        bound,
        ok: sum.dim() >= bound,
    })
}
