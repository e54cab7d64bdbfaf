use thiserror::Error;

use crate::certificates::CertificateFamily;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("reduction polynomial is reducible over GF({p})")]
    ReduciblePolynomial { p: u64 },
    #[error("extension degree {m} > 1 requires a reduction polynomial")]
    MissingReduction { m: u32 },
    #[error("invalid reduction polynomial: {0}")]
    InvalidReduction(String),
    #[error("field order {p}^{m} does not fit in 64 bits")]
    FieldTooLarge { p: u64, m: u32 },
    #[error("element {value} is not in a field of order {q}")]
    InvalidElement { value: u64, q: u64 },

    #[error("operands live over different fields")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ambient dimensions differ ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("{count} node subsets exceed the enumeration cap of {cap}")]
    TooManySubsets { count: u128, cap: u64 },
    #[error("the selected nodes do not determine the data")]
    SingularSystem,

    #[error("repair scheme invalid for node {node}: {reason}")]
    SchemeInvalid { node: usize, reason: String },
    #[error("node data is inconsistent with the code at node {node}")]
    InconsistentNodeData { node: usize },

    #[error("operation requires exactly two parity nodes, code has {0}")]
    RequiresTwoParities(usize),
    #[error("encoding matrix A[{parity},{node}] is singular")]
    SingularEncodingMatrix { parity: usize, node: usize },

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index sets overlap at {0}")]
    OverlappingSets(usize),
    #[error("pair ({0}, {1}) is not complementary")]
    PairsNotComplementary(usize, usize),
    #[error("pairs overlap at index {0}")]
    PairsOverlap(usize),
    #[error("T family index {0} clashes with a complementary pair")]
    IndexClash(usize),
    #[error("invalid partition: {0}")]
    PartitionInvalid(String),
    #[error("subspaces indexed by part {part} sum to dimension {dim}, not {ell}")]
    SumNotFull { part: usize, dim: usize, ell: usize },
    #[error("partition parts have unequal sizes")]
    UnequalParts,
    #[error("enumeration size {size} exceeds cap {cap}")]
    TooLarge { size: u128, cap: u64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("{kind} family with {} members is linearly dependent (rank {rank})", family.members.len())]
    DependentFamily {
        kind: &'static str,
        rank: usize,
        family: Box<CertificateFamily>,
    },
    #[error("derived system fails its subspace conditions: {0}")]
    DerivedSystemInvalid(String),

    #[error("{0} is not a power of two")]
    NonPowerOfTwo(u64),
    #[error("k = {kmax} exceeds the {bound_name} bound {bound} at ell = {ell}, r = {r}")]
    BoundViolated {
        kmax: u64,
        bound_name: &'static str,
        bound: u64,
        ell: u64,
        r: u64,
    },

    #[error("no repair scheme exists for node {node}")]
    NoSchemeExists { node: usize },
    #[error("search budget of {0} expansions exhausted")]
    BudgetExhausted(u64),
}
