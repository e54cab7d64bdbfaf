//! Feasibility search over small parameter spaces.
//!
//! [`search_scheme`] finds repairing subspaces for a concrete code, one
//! failed node at a time. [`search_max_k`] looks for the largest operator
//! system at a given (ell, r, q) by backtracking over sets of subspaces: for
//! a fixed set of subspaces, each Phi_i is looked up in the linear space of
//! matrices leaving every other S_j invariant, so only subspace sets are
//! branched on.
//!
//! Both searches are deterministic for a fixed seed. The max-k search splits
//! its tree by top-level candidate; every branch gets its own expansion
//! budget and random stream, so the result does not depend on the number of
//! worker threads (`MSRLAB_THREADS`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::code::{k_subsets, ArrayCode, CodeParams};
use crate::error::{Error, Result};
use crate::ffalg::{Field, FieldElem, Matrix, Subspace};
use crate::reduction::{check_constant_conditions, check_sc, PhiPair, PhiSystem};
use crate::repair::{verify_scheme, NodeRepair, RepairScheme};

/// Cap on explicitly enumerated subspaces.
pub const MAX_SUBSPACES: u128 = 1_000_000;
/// Above this many candidates per node, scheme search samples at random.
pub const SCHEME_ENUM_CAP: u128 = 100_000;
/// Above this many matrices in an operator space, operators are sampled.
pub const OPERATOR_ENUM_CAP: u128 = 65_536;
/// Random draws per operator lookup when sampling.
pub const OPERATOR_SAMPLES: u32 = 512;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Number of dim-dimensional subspaces of GF(q)^ell, or `None` on overflow.
pub fn gaussian_binomial(ell: usize, dim: usize, q: u64) -> Option<u128> {
    if dim > ell {
        return Some(0);
    }
    let q = q as u128;
    let mut acc: u128 = 1;
    for i in 0..dim {
        let num = q.checked_pow((ell - i) as u32)? - 1;
        let den = q.checked_pow((i + 1) as u32)? - 1;
        acc = acc.checked_mul(num)? / den;
    }
    Some(acc)
}

/// All dim-dimensional subspaces of F^ell in canonical order.
pub fn enumerate_subspaces(ell: usize, dim: usize, field: &Field) -> Result<Vec<Subspace>> {
    let count = gaussian_binomial(ell, dim, field.order());
    match count {
        Some(c) if c <= MAX_SUBSPACES => {}
        other => {
            return Err(Error::TooLarge {
                size: other.unwrap_or(u128::MAX),
                cap: MAX_SUBSPACES as u64,
            })
        }
    }
    let q = field.order();
    let mut out = Vec::new();
    for pivots in k_subsets(ell, dim) {
        // free entries: right of the row's pivot, outside pivot columns
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(row, &pc)| {
                let pivots = &pivots;
                (pc + 1..ell)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (row, c))
            })
            .collect();
        let mut digits = vec![0u64; free.len()];
        loop {
            let mut basis = Matrix::zeros(field, dim, ell);
            for (row, &pc) in pivots.iter().enumerate() {
                basis.set(row, pc, 1);
            }
            for (&(row, c), &v) in free.iter().zip(&digits) {
                basis.set(row, c, v);
            }
            out.push(Subspace::from_rref_unchecked(basis));
            let Some(pos) = (0..digits.len()).rev().find(|&p| digits[p] + 1 < q) else {
                break;
            };
            digits[pos] += 1;
            for d in digits.iter_mut().skip(pos + 1) {
                *d = 0;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A uniformly random full-rank dim x ell matrix's row span.
pub fn random_subspace(rng: &mut impl Rng, field: &Field, ell: usize, dim: usize) -> Subspace {
    let q = field.order();
    loop {
        let data = (0..dim * ell).map(|_| rng.gen_range(0..q)).collect();
        let m = Matrix::from_vec(field, dim, ell, data).expect("shape matches");
        if m.rank() == dim {
            return Subspace::span(&m);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    SchemeForCode,
    MaxKPairs,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub ell: usize,
    pub r: usize,
    pub field: Field,
    pub mode: SearchMode,
    pub seed: u64,
    /// Node expansions allowed: candidate checks for scheme search,
    /// feasibility checks of subspace sets for max-k search.
    pub budget: u64,
    /// Require the span of the first ell/r coordinate vectors to be among
    /// the subspaces.
    pub symmetry_fix: bool,
}

impl SearchConfig {
    pub fn max_k(field: &Field, ell: usize, r: usize) -> Result<SearchConfig> {
        CodeParams::new(ell, 1, r)?;
        Ok(SearchConfig {
            ell,
            r,
            field: field.clone(),
            mode: SearchMode::MaxKPairs,
            seed: 0,
            budget: DEFAULT_BUDGET,
            symmetry_fix: true,
        })
    }

    pub fn for_code(code: &ArrayCode) -> SearchConfig {
        let p = code.params();
        SearchConfig {
            ell: p.ell,
            r: p.r,
            field: code.field().clone(),
            mode: SearchMode::SchemeForCode,
            seed: 0,
            budget: DEFAULT_BUDGET,
            symmetry_fix: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> SearchConfig {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> SearchConfig {
        self.budget = budget;
        self
    }

    pub fn with_symmetry_fix(mut self, on: bool) -> SearchConfig {
        self.symmetry_fix = on;
        self
    }

    fn validate(&self, mode: SearchMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::InvalidParams(format!("config is for {:?}, not {:?}", self.mode, mode)));
        }
        if self.budget == 0 {
            return Err(Error::InvalidParams("budget must be positive".into()));
        }
        CodeParams::new(self.ell, 1, self.r)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Scheme(RepairScheme),
    System(PhiSystem),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    /// Number of pairs found by the max-k search; `None` for scheme search.
    pub kmax: Option<usize>,
    pub witness: Witness,
    /// True iff the whole space was covered, so `kmax` is the maximum and
    /// not just a lower bound.
    pub exhaustive: bool,
    pub expansions: u64,
}

// ---------------------------------------------------------------- schemes

struct NodeScan {
    solutions: Vec<NodeRepair>,
    exhaustive: bool,
    expansions: u64,
}

/// Builds the repair for node `i` from parity subspaces, or `None` when some
/// forced subspace collapses.
fn repair_from_parities(code: &ArrayCode, i: usize, parities: &[Subspace]) -> Result<Option<NodeRepair>> {
    let p = code.params();
    let d = p.repair_dim();
    let mut subs: Vec<Option<Subspace>> = vec![None; p.n()];
    for j in (0..p.k).filter(|&j| j != i) {
        let s = parities[0].apply(code.a(0, j))?;
        if s.dim() != d {
            return Ok(None);
        }
        subs[j] = Some(s);
    }
    for (t, s) in parities.iter().enumerate() {
        if s.dim() != d {
            return Ok(None);
        }
        subs[p.k + t] = Some(s.clone());
    }
    Ok(Some(NodeRepair::from_subspaces(i, subs)))
}

fn scan_node(code: &ArrayCode, i: usize, config: &SearchConfig, first_only: bool) -> Result<NodeScan> {
    let p = code.params();
    let d = p.repair_dim();
    let field = code.field();
    let g = gaussian_binomial(p.ell, d, field.order()).unwrap_or(u128::MAX);

    // With a systematic helper j0 whose encoding matrices are invertible,
    // alignment forces S_{i,k+t} = S_{i,k+1} A_{1,j0} A_{t,j0}^{-1}.
    let forcing: Option<Vec<Matrix>> = (0..p.k).find(|&j| j != i).and_then(|j0| {
        let inv0 = code.a(0, j0).clone();
        (0..p.r)
            .map(|t| code.a(t, j0).inverse().ok().map(|inv| inv0.mul(&inv).expect("square")))
            .collect()
    });
    let count = match &forcing {
        Some(_) => g,
        None => g.checked_pow(p.r as u32).unwrap_or(u128::MAX),
    };

    let mut scan = NodeScan {
        solutions: Vec::new(),
        exhaustive: true,
        expansions: 0,
    };
    let try_parities = |parities: Vec<Subspace>, scan: &mut NodeScan| -> Result<bool> {
        scan.expansions += 1;
        if let Some(rep) = repair_from_parities(code, i, &parities)? {
            if verify_node_repair_ok(code, &rep, i)? {
                scan.solutions.push(rep);
                return Ok(first_only);
            }
        }
        Ok(false)
    };

    if count <= SCHEME_ENUM_CAP {
        let subs = enumerate_subspaces(p.ell, d, field)?;
        let mut tuple = vec![0usize; if forcing.is_some() { 1 } else { p.r }];
        loop {
            if scan.expansions >= config.budget {
                scan.exhaustive = false;
                break;
            }
            let parities: Vec<Subspace> = match &forcing {
                Some(maps) => maps.iter().map(|m| subs[tuple[0]].apply(m)).collect::<Result<_>>()?,
                None => tuple.iter().map(|&x| subs[x].clone()).collect(),
            };
            if try_parities(parities, &mut scan)? {
                break;
            }
            let Some(pos) = (0..tuple.len()).rev().find(|&x| tuple[x] + 1 < subs.len()) else {
                break;
            };
            tuple[pos] += 1;
            for x in tuple.iter_mut().skip(pos + 1) {
                *x = 0;
            }
        }
    } else {
        scan.exhaustive = false;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        while scan.expansions < config.budget {
            let parities: Vec<Subspace> = match &forcing {
                Some(maps) => {
                    let x = random_subspace(&mut rng, field, p.ell, d);
                    maps.iter().map(|m| x.apply(m)).collect::<Result<_>>()?
                }
                None => (0..p.r).map(|_| random_subspace(&mut rng, field, p.ell, d)).collect(),
            };
            if try_parities(parities, &mut scan)? {
                break;
            }
        }
    }
    Ok(scan)
}

fn verify_node_repair_ok(code: &ArrayCode, rep: &NodeRepair, i: usize) -> Result<bool> {
    Ok(crate::repair::verify_node_repair(code, rep, i)?.ok())
}

/// Every valid repair of systematic node `i`, with S_{i,k+1} in canonical
/// order. Requires the candidate space to be enumerable.
pub fn node_solutions(code: &ArrayCode, i: usize) -> Result<Vec<NodeRepair>> {
    let p = code.params();
    if i >= p.k {
        return Err(Error::IndexOutOfRange { index: i, len: p.k });
    }
    let config = SearchConfig::for_code(code).with_budget(u64::MAX);
    let scan = scan_node(code, i, &config, false)?;
    if !scan.exhaustive {
        let g = gaussian_binomial(p.ell, p.repair_dim(), code.field().order()).unwrap_or(u128::MAX);
        return Err(Error::TooLarge {
            size: g,
            cap: SCHEME_ENUM_CAP as u64,
        });
    }
    Ok(scan.solutions)
}

/// Finds a repair for every systematic node; the nodes are searched
/// independently and each gets the full budget.
pub fn search_scheme(code: &ArrayCode, config: &SearchConfig) -> Result<SearchResult> {
    config.validate(SearchMode::SchemeForCode)?;
    let p = code.params();
    if (config.ell, config.r) != (p.ell, p.r) || &config.field != code.field() {
        return Err(Error::InvalidParams("search config does not match the code".into()));
    }
    let mut scheme = RepairScheme::default();
    let mut expansions = 0u64;
    let mut exhaustive = true;
    for i in 0..p.k {
        let scan = scan_node(code, i, config, true)?;
        expansions += scan.expansions;
        exhaustive &= scan.exhaustive;
        match scan.solutions.into_iter().next() {
            Some(rep) => scheme.insert(rep),
            None if scan.exhaustive => return Err(Error::NoSchemeExists { node: i }),
            None => return Err(Error::BudgetExhausted(scan.expansions)),
        }
    }
    for i in 0..p.k {
        let check = verify_scheme(code, &scheme, i)?;
        if !check.ok() {
            return Err(Error::SchemeInvalid {
                node: i,
                reason: "search produced an unverified scheme".into(),
            });
        }
    }
    Ok(SearchResult {
        kmax: None,
        witness: Witness::Scheme(scheme),
        exhaustive,
        expansions,
    })
}

// ------------------------------------------------------------------ max k

struct MaxK {
    field: Field,
    ell: usize,
    d: usize,
    cands: Vec<Subspace>,
    /// Linear constraints on vec(Phi) expressing S_j Phi ⊆ S_j.
    constraints: Vec<Matrix>,
}

struct Branch {
    rng: ChaCha8Rng,
    budget: u64,
    expansions: u64,
    exhaustive: bool,
    best: Vec<usize>,
    best_ops: Vec<Matrix>,
}

impl Branch {
    fn new(seed: u64, stream: u64, budget: u64) -> Branch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Branch {
            rng,
            budget,
            expansions: 0,
            exhaustive: true,
            best: Vec::new(),
            best_ops: Vec::new(),
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.expansions >= self.budget {
            self.exhaustive = false;
            true
        } else {
            false
        }
    }
}

impl MaxK {
    fn new(config: &SearchConfig) -> Result<MaxK> {
        let d = config.ell / config.r;
        let cands = enumerate_subspaces(config.ell, d, &config.field)?;
        let f = &config.field;
        let ell = config.ell;
        let constraints = cands
            .iter()
            .map(|s| {
                let b = s.basis();
                let ker = b.right_kernel();
                let mut c = Matrix::zeros(f, b.rows() * ker.rows(), ell * ell);
                for u in 0..b.rows() {
                    for v in 0..ker.rows() {
                        let row = u * ker.rows() + v;
                        for a in 0..ell {
                            let ba = b.get(u, a);
                            if ba == 0 {
                                continue;
                            }
                            for bcol in 0..ell {
                                c.set(row, a * ell + bcol, f.mul(ba, ker.get(v, bcol)));
                            }
                        }
                    }
                }
                c
            })
            .collect();
        Ok(MaxK {
            field: config.field.clone(),
            ell,
            d,
            cands,
            constraints,
        })
    }

    /// rank [B; image] == 2d, where `image` is a flattened d x ell block.
    fn image_moves_off(&self, b: &Matrix, image: &[FieldElem], buf: &mut Vec<FieldElem>) -> bool {
        buf.clear();
        buf.extend_from_slice(b.data());
        buf.extend_from_slice(image);
        raw_rank(&self.field, 2 * self.d, self.ell, buf) == 2 * self.d
    }

    /// An invertible Phi leaving every S_j (j in `others`) invariant and
    /// moving S_i off itself. The bool is false when the answer came from
    /// sampling and is therefore not conclusive.
    fn operator(&self, i: usize, others: &[usize], rng: &mut ChaCha8Rng) -> (Option<Matrix>, bool) {
        let ell = self.ell;
        let f = &self.field;
        if 2 * self.d > ell {
            return (None, true);
        }
        let basis = if others.is_empty() {
            Matrix::identity(f, ell * ell)
        } else {
            let mut c = self.constraints[others[0]].clone();
            for &j in &others[1..] {
                c = c.vstack(&self.constraints[j]).expect("same width");
            }
            c.right_kernel()
        };
        let dim = basis.rows();
        if dim == 0 {
            return (None, true);
        }
        let b = self.cands[i].basis();
        let q = f.order();
        let img_len = self.d * ell;
        // each row: the image B_i Phi_k followed by Phi_k itself
        let rows: Vec<Vec<FieldElem>> = (0..dim)
            .map(|k| {
                let phi = Matrix::from_vec(f, ell, ell, basis.row(k).to_vec()).expect("shape matches");
                let mut row = b.mul(&phi).expect("square").flatten();
                row.extend_from_slice(basis.row(k));
                row
            })
            .collect();
        let mut buf = Vec::with_capacity(2 * img_len);
        let mut found = None;
        let mut accept = |sum: &[FieldElem], buf: &mut Vec<FieldElem>| {
            if !self.image_moves_off(b, &sum[..img_len], buf) {
                return false;
            }
            let phi = Matrix::from_vec(f, ell, ell, sum[img_len..].to_vec()).expect("shape matches");
            if phi.is_invertible() {
                found = Some(phi);
                true
            } else {
                false
            }
        };

        // The image space {B_i Phi} is small; if none of its members moves
        // S_i off itself there is nothing to find.
        let images: Vec<FieldElem> = rows.iter().flat_map(|r| r[..img_len].iter().copied()).collect();
        let (img_red, img_rank) = Matrix::from_vec(f, dim, img_len, images).expect("shape").rref();
        let img_total = (q as u128).checked_pow(img_rank as u32);
        if img_total.is_some_and(|t| t <= OPERATOR_ENUM_CAP) {
            let img_rows: Vec<Vec<FieldElem>> = (0..img_rank).map(|k| img_red.row(k).to_vec()).collect();
            let any = walk_combinations(f, &img_rows, |sum| self.image_moves_off(b, sum, &mut buf));
            if !any {
                return (None, true);
            }
        }

        let total = (q as u128).checked_pow(dim as u32);
        if total.is_some_and(|t| t <= OPERATOR_ENUM_CAP) {
            walk_combinations(f, &rows, |sum| accept(sum, &mut buf));
            (found, true)
        } else {
            let refs: Vec<&[FieldElem]> = rows.iter().map(Vec::as_slice).collect();
            for _ in 0..OPERATOR_SAMPLES {
                let coef: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..q)).collect();
                if accept(&combine(f, &refs, &coef), &mut buf) {
                    break;
                }
            }
            let conclusive = found.is_some();
            (found, conclusive)
        }
    }

    /// Adds candidate `c` to the feasible sorted `set` whose operators are
    /// `ops`. Operators that already leave S_c invariant are kept; the rest
    /// are looked up again, so the answer is exact whenever the lookups are.
    fn extend(&self, set: &[usize], ops: &[Matrix], c: usize, branch: &mut Branch) -> Option<(Vec<usize>, Vec<Matrix>)> {
        branch.expansions += 1;
        let child = with(set, c);
        let mut child_ops = Vec::with_capacity(child.len());
        let mut old = set.iter().zip(ops);
        for (pos, &i) in child.iter().enumerate() {
            let kept = if i == c {
                None
            } else {
                let (_, phi) = old.next().expect("set is a subsequence of child");
                self.cands[c].is_invariant(phi).expect("square").then(|| phi.clone())
            };
            let op = match kept {
                Some(phi) => phi,
                None => {
                    let others: Vec<usize> =
                        child.iter().enumerate().filter(|&(o, _)| o != pos).map(|(_, &j)| j).collect();
                    let (op, conclusive) = self.operator(i, &others, &mut branch.rng);
                    if !conclusive {
                        branch.exhaustive = false;
                    }
                    op?
                }
            };
            child_ops.push(op);
        }
        Some((child, child_ops))
    }

    fn record(&self, set: &[usize], ops: &[Matrix], branch: &mut Branch) {
        if set.len() > branch.best.len() {
            branch.best = set.to_vec();
            branch.best_ops = ops.to_vec();
        }
    }

    /// Grows the feasible `set` by viable candidates, each of which already
    /// forms a feasible set together with `set`.
    fn dfs(&self, set: &[usize], ops: &[Matrix], viable: &[usize], branch: &mut Branch) {
        self.record(set, ops, branch);
        for (idx, &c) in viable.iter().enumerate() {
            if set.len() + viable.len() - idx <= branch.best.len() || branch.out_of_budget() {
                return;
            }
            let Some((child, child_ops)) = self.extend(set, ops, c, branch) else {
                continue;
            };
            let child_viable = self.viable(&child, &child_ops, &viable[idx + 1..], branch);
            self.dfs(&child, &child_ops, &child_viable, branch);
        }
    }

    /// Candidates that keep `set` feasible when added.
    fn viable(&self, set: &[usize], ops: &[Matrix], cands: &[usize], branch: &mut Branch) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in cands {
            if branch.out_of_budget() {
                break;
            }
            if self.extend(set, ops, c, branch).is_some() {
                out.push(c);
            }
        }
        out
    }
}

/// sum_k coef[k] * rows[k].
fn combine(f: &Field, rows: &[&[FieldElem]], coef: &[FieldElem]) -> Vec<FieldElem> {
    let mut out = vec![0; rows.first().map_or(0, |r| r.len())];
    for (row, &c) in rows.iter().zip(coef) {
        if c == 0 {
            continue;
        }
        for (x, &v) in out.iter_mut().zip(*row) {
            *x = f.add(*x, f.mul(c, v));
        }
    }
    out
}

/// Runs `visit` on every nonzero combination sum_k c_k rows[k], with the
/// coefficient vectors in lexicographic order, until it returns true. The
/// sum is updated in place: resetting a digit from q - 1 to 0 adds its row
/// once more, since q = 0 in the field.
fn walk_combinations(f: &Field, rows: &[Vec<FieldElem>], mut visit: impl FnMut(&[FieldElem]) -> bool) -> bool {
    let q = f.order();
    let dim = rows.len();
    let mut coef = vec![0u64; dim];
    let mut sum = vec![0; rows.first().map_or(0, Vec::len)];
    let add = |sum: &mut [FieldElem], row: &[FieldElem]| {
        for (x, &v) in sum.iter_mut().zip(row) {
            *x = f.add(*x, v);
        }
    };
    while let Some(pos) = (0..dim).rev().find(|&p| coef[p] + 1 < q) {
        coef[pos] += 1;
        add(&mut sum, &rows[pos]);
        for j in pos + 1..dim {
            coef[j] = 0;
            add(&mut sum, &rows[j]);
        }
        if visit(&sum) {
            return true;
        }
    }
    false
}

/// Rank of a row-major rows x cols block, eliminated in place.
fn raw_rank(f: &Field, rows: usize, cols: usize, data: &mut [FieldElem]) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(sel) = (rank..rows).find(|&r| data[r * cols + c] != 0) else {
            continue;
        };
        for j in 0..cols {
            data.swap(sel * cols + j, rank * cols + j);
        }
        let inv = f.inv(data[rank * cols + c]).expect("nonzero pivot");
        for r in rank + 1..rows {
            let factor = data[r * cols + c];
            if factor == 0 {
                continue;
            }
            let scale = f.neg(f.mul(factor, inv));
            for j in c..cols {
                let pv = data[rank * cols + j];
                data[r * cols + j] = f.add(data[r * cols + j], f.mul(scale, pv));
            }
        }
        rank += 1;
    }
    rank
}

/// `set` plus `c`, kept sorted.
fn with(set: &[usize], c: usize) -> Vec<usize> {
    let mut v = set.to_vec();
    let pos = v.partition_point(|&x| x < c);
    v.insert(pos, c);
    v
}

fn worker_count() -> usize {
    std::env::var("MSRLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Largest K admitting K pairs (S_i, Phi_i) with dim S_i = ell/r that
/// satisfy the invariance and trivial-intersection conditions (for r = 2
/// these are exactly the two-parity conditions). Non-exhaustive results are
/// lower bounds.
pub fn search_max_k(config: &SearchConfig) -> Result<SearchResult> {
    config.validate(SearchMode::MaxKPairs)?;
    let ctx = MaxK::new(config)?;
    let mut root = Branch::new(config.seed, 0, config.budget);

    let base: Vec<usize> = if config.symmetry_fix {
        let coord = Subspace::coordinate(&ctx.field, ctx.ell, ctx.d);
        vec![ctx.cands.binary_search(&coord).expect("coordinate subspace is a candidate")]
    } else {
        Vec::new()
    };
    let base_ops = match base.first() {
        None => Some(Vec::new()),
        Some(&c) => ctx.extend(&[], &[], c, &mut root).map(|(_, ops)| ops),
    };

    let mut best = (Vec::new(), Vec::new());
    let mut viable = Vec::new();
    if let Some(ops) = base_ops {
        let others: Vec<usize> = (0..ctx.cands.len()).filter(|c| !base.contains(c)).collect();
        viable = ctx.viable(&base, &ops, &others, &mut root);
        best = (base.clone(), ops);
    }

    let remaining = config.budget.saturating_sub(root.expansions);
    let share = (remaining / viable.len().max(1) as u64).max(1);
    let run_branch = |b: usize| -> Branch {
        let mut branch = Branch::new(config.seed, b as u64 + 1, share);
        if let Some((set, ops)) = ctx.extend(&base, &best.1, viable[b], &mut branch) {
            let child_viable = ctx.viable(&set, &ops, &viable[b + 1..], &mut branch);
            ctx.dfs(&set, &ops, &child_viable, &mut branch);
        }
        branch
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let branches: Vec<Branch> = pool.install(|| (0..viable.len()).into_par_iter().map(run_branch).collect());

    let mut expansions = root.expansions;
    let mut exhaustive = root.exhaustive;
    for b in branches {
        expansions += b.expansions;
        exhaustive &= b.exhaustive;
        if b.best.len() > best.0.len() {
            best = (b.best, b.best_ops);
        }
    }

    let pairs = best
        .0
        .iter()
        .zip(best.1)
        .map(|(&c, phi)| PhiPair {
            phi,
            s: ctx.cands[c].clone(),
        })
        .collect();
    let sys = PhiSystem::new(&ctx.field, ctx.ell, config.r, pairs)?;
    verify_witness(&sys)?;
    Ok(SearchResult {
        kmax: Some(sys.len()),
        witness: Witness::System(sys),
        exhaustive,
        expansions,
    })
}

fn verify_witness(sys: &PhiSystem) -> Result<()> {
    let report = check_sc(sys);
    let report = if report.ok() && sys.r() == 2 {
        check_constant_conditions(sys, None)?
    } else {
        report
    };
    if report.ok() {
        Ok(())
    } else {
        Err(Error::DerivedSystemInvalid(
            report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ))
    }
}
