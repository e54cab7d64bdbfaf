//! The `msrlab` command line. `run` is the whole program; `main` only wires
//! it to the process streams.
//!
//! Exit codes: 0 success, 1 a checked property fails, 2 bad usage or input.

pub mod formats;
pub mod json;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use msrlab::bounds::{consistency_assert, BoundReport};
use msrlab::certificates::{
    build_gamma, build_identity_theta, build_lambda, build_r, build_t, build_upsilon, check_corollary1,
    sum_dim_check, CertificateFamily, MemberLabel,
};
use msrlab::code::ArrayCode;
use msrlab::ffalg::family_rank;
use msrlab::reduction::{check_constant_conditions, check_sc, theta_reduce, PhiSystem};
use msrlab::repair::{bandwidth_of, execute_repair, verify_scheme, RepairScheme};
use msrlab::search::{node_solutions, search_max_k, search_scheme, SearchConfig, SearchResult, Witness};
use msrlab::{Error, Field, FieldElem, Matrix};
use serde_json::{json, Map, Value};
use thiserror::Error;

use formats::*;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(
                Error::BoundViolated { .. }
                | Error::NoSchemeExists { .. }
                | Error::BudgetExhausted(_)
                | Error::DependentFamily { .. }
                | Error::SchemeInvalid { .. }
                | Error::DerivedSystemInvalid(_)
                | Error::InconsistentNodeData { .. },
            ) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "msrlab", version, about = "MDS array codes with optimal repair: checks, searches and bounds")]
struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that every k of the n nodes determine the data.
    VerifyMds { code: PathBuf },
    /// Check a repair scheme against the subspace conditions.
    VerifyRepair {
        code: PathBuf,
        scheme: PathBuf,
        /// Only this systematic node (1-based).
        #[arg(long)]
        fail: Option<usize>,
    },
    /// Run a repair on concrete data and print what each helper sends.
    Repair {
        code: PathBuf,
        scheme: PathBuf,
        #[arg(long)]
        fail: usize,
        #[arg(long)]
        data: PathBuf,
    },
    /// Find a repair scheme, or with --fail list every repair of one node.
    SearchScheme {
        code: PathBuf,
        #[arg(long)]
        fail: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Write the scheme here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest system of operator/subspace pairs over GF(p^m).
    SearchMaxk {
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Reduction polynomial coefficients, constant term first, e.g. 1,1,1.
        /// The first irreducible monic polynomial is used when omitted.
        #[arg(long)]
        reduction: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        no_symmetry_fix: bool,
        /// Write the witness system here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the operator system of a two-parity code.
    ReduceTheta {
        code: PathBuf,
        /// Searched for when omitted.
        scheme: Option<PathBuf>,
        /// Anchor node (1-based); defaults to the last systematic node.
        #[arg(long)]
        anchor: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a certificate family on a system and check its independence.
    Certify {
        #[arg(long, value_enum)]
        family: FamilyArg,
        system: PathBuf,
        /// Complementary pairs, e.g. 1:2,3:4.
        #[arg(long)]
        pairs: Option<String>,
        /// Parts separated by semicolons, e.g. "1,2;3,4".
        #[arg(long)]
        partition: Option<String>,
        #[arg(long)]
        odd: Option<String>,
        #[arg(long)]
        even: Option<String>,
        /// Subspace indices for sumdim; all of them when omitted.
        #[arg(long)]
        indices: Option<String>,
    },
    /// Evaluate the sub-packetization bounds.
    Bounds {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        r: u64,
        /// Total node count, for the bandwidth figure.
        #[arg(long)]
        n: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Upsilon,
    T,
    R,
    Lambda,
    Gamma,
    Identity,
    Sumdim,
}

/// Text lines and a JSON document for one command, plus its exit code.
struct Report {
    lines: Vec<String>,
    doc: Map<String, Value>,
    code: i32,
}

impl Report {
    fn new() -> Report {
        Report {
            lines: Vec::new(),
            doc: document(),
            code: 0,
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn set(&mut self, key: &str, v: Value) {
        self.doc.insert(key.into(), v);
    }

    fn fail(&mut self) {
        self.code = 1;
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(rep) => {
            let text = if cli.json {
                json::to_string(&Value::Object(rep.doc))
            } else {
                rep.lines.iter().map(|l| format!("{l}\n")).collect()
            };
            let _ = out.write_all(text.as_bytes());
            rep.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::VerifyMds { code } => verify_mds(&load_code(&code)?),
        Command::VerifyRepair { code, scheme, fail } => {
            let code = load_code(&code)?;
            let scheme = scheme_from_json(&read_json(&scheme)?, &code)?;
            verify_repair(&code, &scheme, fail)
        }
        Command::Repair { code, scheme, fail, data } => {
            let code = load_code(&code)?;
            let scheme = scheme_from_json(&read_json(&scheme)?, &code)?;
            let data = data_from_json(&read_json(&data)?, &code)?;
            repair(&code, &scheme, fail, &data)
        }
        Command::SearchScheme {
            code,
            fail,
            seed,
            budget,
            out,
        } => {
            let code = load_code(&code)?;
            let cfg = configure(SearchConfig::for_code(&code), seed, budget);
            match fail {
                Some(n) => list_solutions(&code, node_index(n, code.params().k, "--fail")?, &cfg),
                None => find_scheme(&code, &cfg, out.as_deref()),
            }
        }
        Command::SearchMaxk {
            ell,
            r,
            p,
            m,
            reduction,
            seed,
            budget,
            no_symmetry_fix,
            out,
        } => {
            let field = make_field(p, m, reduction.as_deref())?;
            let cfg = SearchConfig::max_k(&field, ell, r)?.with_symmetry_fix(!no_symmetry_fix);
            max_k(&configure(cfg, seed, budget), out.as_deref())
        }
        Command::ReduceTheta {
            code,
            scheme,
            anchor,
            out,
        } => {
            let code = load_code(&code)?;
            let scheme = match scheme {
                Some(path) => scheme_from_json(&read_json(&path)?, &code)?,
                None => match search_scheme(&code, &SearchConfig::for_code(&code))?.witness {
                    Witness::Scheme(s) => s,
                    Witness::System(_) => unreachable!("scheme search returns schemes"),
                },
            };
            let anchor = anchor.map(|a| node_index(a, code.params().k, "--anchor")).transpose()?;
            reduce(&code, &scheme, anchor, out.as_deref())
        }
        Command::Certify {
            family,
            system,
            pairs,
            partition,
            odd,
            even,
            indices,
        } => {
            let sys = system_from_json(&read_json(&system)?)?;
            let sel = Selectors {
                pairs,
                partition,
                odd,
                even,
                indices,
            };
            certify(&sys, family, &sel)
        }
        Command::Bounds { ell, r, n } => bounds(ell, r, n),
    }
}

fn load_code(path: &Path) -> Result<ArrayCode, CliError> {
    code_from_json(&read_json(path)?)
}

fn write_doc(path: &Path, v: &Value) -> Result<(), CliError> {
    std::fs::write(path, json::to_string(v)).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn configure(mut cfg: SearchConfig, seed: Option<u64>, budget: Option<u64>) -> SearchConfig {
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(b) = budget {
        cfg = cfg.with_budget(b);
    }
    cfg
}

/// A 1-based node number to a zero-based index below `len`.
fn node_index(n: usize, len: usize, flag: &str) -> Result<usize, CliError> {
    if n == 0 || n > len {
        return Err(CliError::Usage(format!("{flag} {n} is not in 1..={len}")));
    }
    Ok(n - 1)
}

fn make_field(p: u64, m: u32, reduction: Option<&str>) -> Result<Field, CliError> {
    if m == 1 && reduction.is_none() {
        return Ok(Field::prime(p)?);
    }
    if let Some(r) = reduction {
        let coeffs = parse_list(r, "--reduction")?;
        return Ok(Field::new(p, m, Some(&coeffs))?);
    }
    if !msrlab::ffalg::is_prime(p) {
        return Err(Error::NonPrimeCharacteristic(p).into());
    }
    let lower = p
        .checked_pow(m)
        .ok_or(CliError::Lib(Error::FieldTooLarge { p, m }))?;
    for mut v in 0..lower {
        let mut coeffs = Vec::with_capacity(m as usize + 1);
        for _ in 0..m {
            coeffs.push(v % p);
            v /= p;
        }
        coeffs.push(1);
        if let Ok(f) = Field::new(p, m, Some(&coeffs)) {
            return Ok(f);
        }
    }
    Err(CliError::Usage(format!("no irreducible polynomial of degree {m} over GF({p})")))
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("{flag}: '{x}' is not a nonnegative integer")))
        })
        .collect()
}

/// 1-based comma list to zero-based indices.
fn parse_indices(s: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    parse_list(s, flag)?
        .into_iter()
        .map(|i| {
            if i == 0 {
                Err(CliError::Usage(format!("{flag}: indices start at 1")))
            } else {
                Ok(i as usize - 1)
            }
        })
        .collect()
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("--pairs: '{pair}' is not of the form a:b")))?;
            let ab = parse_indices(&format!("{a},{b}"), "--pairs")?;
            Ok((ab[0], ab[1]))
        })
        .collect()
}

fn parse_partition(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    s.split(';').map(|part| parse_indices(part, "--partition")).collect()
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn fmt_vec(v: &[FieldElem]) -> String {
    json!(v).to_string().replace(',', ", ")
}

fn fmt_matrix(m: &Matrix) -> String {
    json::to_string(&matrix_to_json(m)).trim_end().to_string()
}

fn verify_mds(code: &ArrayCode) -> Result<Report, CliError> {
    let mds = code.verify_mds()?;
    let mut rep = Report::new();
    rep.line(format!("MDS: {}/{} subsets invertible", mds.passing(), mds.subsets_checked));
    for s in &mds.failing {
        rep.line(format!("singular: nodes {}", fmt_vec(&one_based(s).iter().map(|&x| x as u64).collect::<Vec<_>>())));
    }
    rep.set("mds", json!(mds.is_mds()));
    rep.set("subsets_checked", json!(mds.subsets_checked));
    rep.set("passing", json!(mds.passing()));
    rep.set("failing", json!(mds.failing.iter().map(|s| one_based(s)).collect::<Vec<_>>()));
    if !mds.is_mds() {
        rep.fail();
    }
    Ok(rep)
}

fn verify_repair(code: &ArrayCode, scheme: &RepairScheme, fail: Option<usize>) -> Result<Report, CliError> {
    let k = code.params().k;
    let nodes = match fail {
        Some(n) => vec![node_index(n, k, "--fail")?],
        None => (0..k).collect(),
    };
    let mut rep = Report::new();
    let mut results = Vec::new();
    for i in nodes {
        let (ok, problems) = match scheme.get(i) {
            None => (false, vec!["no repair given".to_string()]),
            Some(_) => {
                let check = verify_scheme(code, scheme, i)?;
                (check.ok(), check.violations.iter().map(ToString::to_string).collect())
            }
        };
        if ok {
            let symbols: usize = scheme.get(i).unwrap().helpers.iter().flatten().map(Matrix::rows).sum();
            rep.line(format!("node {}: ok, {symbols} symbols", i + 1));
        } else {
            rep.line(format!("node {}: FAIL", i + 1));
            for p in &problems {
                rep.line(format!("  {p}"));
            }
            rep.fail();
        }
        results.push(json!({"node": i + 1, "ok": ok, "violations": problems}));
    }
    rep.set("ok", json!(rep.code == 0));
    rep.set("nodes", Value::Array(results));
    Ok(rep)
}

fn repair(code: &ArrayCode, scheme: &RepairScheme, fail: usize, data: &msrlab::code::DataFill) -> Result<Report, CliError> {
    let i = node_index(fail, code.params().k, "--fail")?;
    let nodes = code.encode(data)?;
    let t = execute_repair(code, scheme, i, &nodes)?;
    let mut rep = Report::new();
    for (j, v) in &t.transmissions {
        rep.line(format!("node {} sends {}", j + 1, fmt_vec(v)));
    }
    let exact = t.recovered == data.systematic[i];
    rep.line(format!("recovered node {}: {}", i + 1, fmt_vec(&t.recovered)));
    rep.line(format!("symbols transmitted: {}", t.total_symbols));
    rep.line(format!("matches stored data: {}", if exact { "yes" } else { "no" }));
    if !exact {
        rep.fail();
    }
    rep.set("failed", json!(i + 1));
    rep.set(
        "transmissions",
        Value::Array(t.transmissions.iter().map(|(j, v)| json!({"helper": j + 1, "symbols": v})).collect()),
    );
    rep.set("recovered", json!(t.recovered));
    rep.set("total_symbols", json!(t.total_symbols));
    rep.set("exact", json!(exact));
    Ok(rep)
}

fn list_solutions(code: &ArrayCode, i: usize, cfg: &SearchConfig) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let (solutions, complete) = match node_solutions(code, i) {
        Ok(s) => (s, true),
        Err(Error::TooLarge { .. }) => {
            let res = search_scheme(code, cfg)?;
            let Witness::Scheme(s) = res.witness else { unreachable!("scheme search returns schemes") };
            (s.get(i).into_iter().cloned().collect(), false)
        }
        Err(e) => return Err(e.into()),
    };
    if complete {
        rep.line(format!("node {}: {} repair solutions", i + 1, solutions.len()));
    } else {
        rep.line(format!("node {}: too many solutions to list; one found by search", i + 1));
    }
    for (n, sol) in solutions.iter().enumerate() {
        let helpers: Vec<String> = sol
            .helpers
            .iter()
            .enumerate()
            .filter_map(|(j, h)| h.as_ref().map(|h| format!("{}: {}", j + 1, fmt_matrix(h))))
            .collect();
        rep.line(format!("  #{} {}", n + 1, helpers.join("  ")));
    }
    let mut one = RepairScheme::default();
    let docs: Vec<Value> = solutions
        .into_iter()
        .map(|s| {
            one.nodes.clear();
            one.insert(s);
            scheme_to_json(&one)["nodes"][0].clone()
        })
        .collect();
    rep.set("node", json!(i + 1));
    rep.set("complete", json!(complete));
    rep.set("solutions", Value::Array(docs));
    Ok(rep)
}

fn find_scheme(code: &ArrayCode, cfg: &SearchConfig, out: Option<&Path>) -> Result<Report, CliError> {
    let res = search_scheme(code, cfg)?;
    let Witness::Scheme(scheme) = &res.witness else { unreachable!("scheme search returns schemes") };
    let mut rep = Report::new();
    let mut worst = 0;
    for (i, node) in &scheme.nodes {
        let symbols: usize = node.helpers.iter().flatten().map(Matrix::rows).sum();
        worst = worst.max(symbols);
        rep.line(format!("node {}: {symbols} symbols", i + 1));
        for (j, h) in node.helpers.iter().enumerate() {
            if let Some(h) = h {
                rep.line(format!("  helper {}: {}", j + 1, fmt_matrix(h)));
            }
        }
    }
    let optimal = bandwidth_of(code.params());
    rep.line(format!("bandwidth: {worst} symbols per repair (optimal {optimal})"));
    rep.set("bandwidth", json!(worst));
    rep.set("optimal", json!(optimal.to_string()));
    rep.set("expansions", json!(res.expansions));
    rep.set("scheme", scheme_to_json(scheme));
    if let Some(path) = out {
        write_doc(path, &scheme_to_json(scheme))?;
        rep.line(format!("scheme written to {}", path.display()));
    }
    Ok(rep)
}

fn field_name(f: &Field) -> String {
    if f.degree() == 1 {
        format!("GF({})", f.characteristic())
    } else {
        format!("GF({}^{})", f.characteristic(), f.degree())
    }
}

fn bounds_json(b: &BoundReport) -> Value {
    json!({
        "quadratic": b.quadratic,
        "linear_r2": b.linear_r2,
        "logsq": b.logsq,
        "known_achievable": b.known_achievable,
        "bandwidth": b.bandwidth.map(|x| x.to_string()),
    })
}

fn max_k(cfg: &SearchConfig, out: Option<&Path>) -> Result<Report, CliError> {
    let res: SearchResult = search_max_k(cfg)?;
    let kmax = res.kmax.unwrap_or(0);
    let Witness::System(sys) = &res.witness else { unreachable!("max-k search returns systems") };
    let mut rep = Report::new();
    rep.line(format!(
        "kmax = {kmax} over {} at ell = {}, r = {} ({})",
        field_name(&cfg.field),
        cfg.ell,
        cfg.r,
        if res.exhaustive { "exhaustive" } else { "lower bound, search incomplete" }
    ));
    rep.line(format!("expansions: {}", res.expansions));

    let mut verified = check_sc(sys).ok();
    if cfg.r == 2 {
        verified &= check_constant_conditions(sys, None)?.ok();
    }
    rep.line(format!("witness re-verified: {}", if verified { "yes" } else { "NO" }));
    if !verified {
        rep.fail();
    }

    let report = BoundReport::new(cfg.ell as u64, cfg.r as u64, None)?;
    let bound_list = report
        .upper_bounds()
        .iter()
        .map(|(name, b)| format!("{name} {b}"))
        .collect::<Vec<_>>()
        .join(", ");
    consistency_assert(kmax as u64, &report)?;
    rep.line(format!("consistent with bounds: {bound_list}"));

    rep.set("field", field_to_json(&cfg.field));
    rep.set("ell", json!(cfg.ell));
    rep.set("r", json!(cfg.r));
    rep.set("kmax", json!(kmax));
    rep.set("exhaustive", json!(res.exhaustive));
    rep.set("expansions", json!(res.expansions));
    rep.set("verified", json!(verified));
    rep.set("bounds", bounds_json(&report));
    rep.set("witness", system_to_json(sys));
    if let Some(path) = out {
        write_doc(path, &system_to_json(sys))?;
        rep.line(format!("system written to {}", path.display()));
    }
    Ok(rep)
}

fn reduce(code: &ArrayCode, scheme: &RepairScheme, anchor: Option<usize>, out: Option<&Path>) -> Result<Report, CliError> {
    let sys = theta_reduce(code, scheme, anchor)?;
    let ell = sys.ell();
    let sc = check_sc(&sys);
    let mut family = vec![Matrix::identity(sys.field(), ell)];
    family.extend(sys.operators());
    let rank = family_rank(&family)?;
    let mut rep = Report::new();
    rep.line(format!("pairs: {}", sys.len()));
    if sc.ok() {
        rep.line("subspace conditions: ok");
    } else {
        rep.line("subspace conditions: FAIL");
        for v in &sc.violations {
            rep.line(format!("  {v}"));
        }
        rep.fail();
    }
    rep.line(format!(
        "rank of identity and {} Theta operators: {rank} (ell^2 = {})",
        sys.len(),
        ell * ell
    ));
    rep.set("pairs", json!(sys.len()));
    rep.set("conditions_ok", json!(sc.ok()));
    rep.set("violations", json!(sc.violations.iter().map(ToString::to_string).collect::<Vec<_>>()));
    rep.set("rank", json!(rank));
    rep.set("ell_squared", json!(ell * ell));
    rep.set("system", system_to_json(&sys));
    if let Some(path) = out {
        write_doc(path, &system_to_json(&sys))?;
        rep.line(format!("system written to {}", path.display()));
    }
    Ok(rep)
}

struct Selectors {
    pairs: Option<String>,
    partition: Option<String>,
    odd: Option<String>,
    even: Option<String>,
    indices: Option<String>,
}

impl Selectors {
    fn required<'a>(v: &'a Option<String>, flag: &str, family: &str) -> Result<&'a str, CliError> {
        v.as_deref()
            .ok_or_else(|| CliError::Usage(format!("--family {family} needs {flag}")))
    }

    fn pairs(&self, family: &str) -> Result<Vec<(usize, usize)>, CliError> {
        parse_pairs(Self::required(&self.pairs, "--pairs", family)?)
    }

    fn partition(&self, family: &str) -> Result<Vec<Vec<usize>>, CliError> {
        parse_partition(Self::required(&self.partition, "--partition", family)?)
    }

    fn split(&self) -> Result<(Vec<usize>, Vec<usize>), CliError> {
        let get = |v: &Option<String>, flag| v.as_deref().map_or(Ok(Vec::new()), |s| parse_indices(s, flag));
        Ok((get(&self.odd, "--odd")?, get(&self.even, "--even")?))
    }
}

fn label_text(l: &MemberLabel) -> String {
    let bits = |b: &[bool]| b.iter().map(|&x| if x { '1' } else { '0' }).collect::<String>();
    match l {
        MemberLabel::Identity => "I".into(),
        MemberLabel::Operator(i) => format!("Phi_{}", i + 1),
        MemberLabel::Pair(i, j) => format!("Phi_{} Phi_{}", i + 1, j + 1),
        MemberLabel::Bits(b) => format!("blocks {}", bits(b)),
        MemberLabel::Scaled { omega, bits: b } => match omega {
            None => format!("I x blocks {}", bits(b)),
            Some((i, j)) => format!("Phi_{} Phi_{} x blocks {}", i + 1, j + 1, bits(b)),
        },
        MemberLabel::Tuple(t) => t.iter().map(|i| format!("Phi_{}", i + 1)).collect::<Vec<_>>().join(" "),
    }
}

fn family_json(fam: &CertificateFamily) -> Value {
    json!({
        "kind": fam.kind.name(),
        "members": fam
            .members
            .iter()
            .map(|m| json!({"label": label_text(&m.label), "matrix": matrix_to_json(&m.matrix)}))
            .collect::<Vec<_>>(),
    })
}

fn dump_family(rep: &mut Report, fam: &CertificateFamily) {
    for m in &fam.members {
        rep.line(format!("  {}: {}", label_text(&m.label), fmt_matrix(&m.matrix)));
    }
}

fn family_report(rep: &mut Report, fam: &CertificateFamily) -> Result<bool, CliError> {
    let rank = fam.rank()?;
    let independent = rank == fam.members.len();
    rep.line(format!(
        "{}: {} matrices, rank {rank}, {}",
        fam.kind.name(),
        fam.members.len(),
        if independent { "independent" } else { "DEPENDENT" }
    ));
    rep.set("kind", json!(fam.kind.name()));
    rep.set("matrices", json!(fam.members.len()));
    rep.set("rank", json!(rank));
    rep.set("independent", json!(independent));
    Ok(independent)
}

/// Library errors number systems and parts from zero; the CLI from one.
fn renumber(e: Error) -> Error {
    match e {
        Error::IndexOutOfRange { index, len } => Error::IndexOutOfRange { index: index + 1, len },
        Error::OverlappingSets(i) => Error::OverlappingSets(i + 1),
        Error::PairsNotComplementary(a, b) => Error::PairsNotComplementary(a + 1, b + 1),
        Error::PairsOverlap(i) => Error::PairsOverlap(i + 1),
        Error::IndexClash(i) => Error::IndexClash(i + 1),
        Error::SumNotFull { part, dim, ell } => Error::SumNotFull { part: part + 1, dim, ell },
        other => other,
    }
}

fn certify(sys: &PhiSystem, family: FamilyArg, sel: &Selectors) -> Result<Report, CliError> {
    certify_inner(sys, family, sel).map_err(|e| match e {
        CliError::Lib(e) => CliError::Lib(renumber(e)),
        other => other,
    })
}

fn certify_inner(sys: &PhiSystem, family: FamilyArg, sel: &Selectors) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let built = match family {
        FamilyArg::Upsilon => build_upsilon(sys, &sel.pairs("upsilon")?),
        FamilyArg::Lambda => build_lambda(sys, &sel.partition("lambda")?),
        FamilyArg::Gamma => build_gamma(sys, &sel.partition("gamma")?),
        FamilyArg::Identity => build_identity_theta(sys),
        FamilyArg::R => {
            let (odd, even) = sel.split()?;
            let t = build_t(sys, &odd, &even)?;
            build_r(sys, &sel.pairs("r")?, &t)
        }
        FamilyArg::T => {
            let (odd, even) = sel.split()?;
            let fam = build_t(sys, &odd, &even)?;
            let independent = family_report(&mut rep, &fam)?;
            let c = check_corollary1(sys, &fam)?;
            rep.line(format!(
                "hypothesis (no complementary cross pair): {}",
                if c.hypothesis { "holds" } else { "fails" }
            ));
            if let Some((i, j)) = c.witness {
                rep.line(format!("complementary pair: {}:{}", i + 1, j + 1));
            }
            rep.line(format!("corollary: {}", if c.holds() { "holds" } else { "VIOLATED" }));
            rep.set("hypothesis", json!(c.hypothesis));
            rep.set("corollary_holds", json!(c.holds()));
            rep.set("witness", json!(c.witness.map(|(i, j)| [i + 1, j + 1])));
            if !c.holds() {
                rep.fail();
            }
            if !independent || !c.holds() {
                dump_family(&mut rep, &fam);
                rep.set("family", family_json(&fam));
            }
            return Ok(rep);
        }
        FamilyArg::Sumdim => {
            let indices = match &sel.indices {
                Some(s) => parse_indices(s, "--indices")?,
                None => (0..sys.len()).collect(),
            };
            let c = sum_dim_check(sys, &indices)?;
            rep.line(format!(
                "sum of {} subspaces: dimension {}, bound {}, {}",
                indices.len(),
                c.dim,
                c.bound,
                if c.ok { "ok" } else { "VIOLATED" }
            ));
            rep.set("indices", json!(one_based(&indices)));
            rep.set("dim", json!(c.dim));
            rep.set("bound", json!(c.bound));
            rep.set("ok", json!(c.ok));
            if !c.ok {
                rep.fail();
            }
            return Ok(rep);
        }
    };
    match built {
        Ok(fam) => {
            family_report(&mut rep, &fam)?;
        }
        Err(Error::DependentFamily { family, .. }) => {
            family_report(&mut rep, &family)?;
            dump_family(&mut rep, &family);
            rep.set("family", family_json(&family));
            rep.fail();
        }
        Err(e) => return Err(e.into()),
    }
    Ok(rep)
}

fn bounds(ell: u64, r: u64, n: Option<u64>) -> Result<Report, CliError> {
    let b = BoundReport::new(ell, r, n)?;
    let mut rep = Report::new();
    let opt = |v: Option<u64>| v.map_or("n/a".to_string(), |x| x.to_string());
    rep.line(format!("ell = {ell}, r = {r}"));
    rep.line(format!("quadratic: {}", b.quadratic));
    rep.line(format!("linear_r2: {}", opt(b.linear_r2)));
    rep.line(format!("logsq: {}", opt(b.logsq)));
    rep.line(format!(
        "known_achievable: {}",
        b.known_achievable.map_or("n/a".to_string(), |x| format!("{x}"))
    ));
    rep.line(format!("bandwidth: {}", b.bandwidth.map_or("n/a".to_string(), |x| x.to_string())));
    rep.set("ell", json!(ell));
    rep.set("r", json!(r));
    rep.set("n", json!(n));
    if let Value::Object(m) = bounds_json(&b) {
        rep.doc.extend(m);
    }
    Ok(rep)
}
