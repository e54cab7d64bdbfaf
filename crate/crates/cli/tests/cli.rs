use std::path::{Path, PathBuf};

use msrlab::code::{ArrayCode, CodeParams, DataFill};
use msrlab::reduction::{PhiPair, PhiSystem};
use msrlab::repair::{NodeRepair, RepairScheme};
use msrlab::{Field, Matrix, Subspace};
use msrlab_cli::formats::*;
use msrlab_cli::{json, run};
use proptest::prelude::*;
use serde_json::{json, Value};
use tempfile::TempDir;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn msrlab(args: &[&str]) -> Out {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("msrlab").chain(args.iter().copied()), &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json::to_string(v)).unwrap();
    p.display().to_string()
}

#[test]
fn verify_mds_on_fixtures() {
    let o = msrlab(&["verify-mds", &fixture("fig1.json")]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "MDS: 6/6 subsets invertible\n");
    let o = msrlab(&["verify-mds", &fixture("table1.json")]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with("MDS: 15/15 subsets invertible"));
}

#[test]
fn non_mds_code_exits_one_with_failing_subsets() {
    let dir = TempDir::new().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(fixture("fig1.json")).unwrap()).unwrap();
    // both parities equal to the identity: nodes 3 and 4 then coincide
    v["encoding"][1] = json!([[[1, 0], [0, 1]], [[1, 0], [0, 1]]]);
    let path = write(dir.path(), "bad.json", &v);
    let o = msrlab(&["verify-mds", &path]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("singular: nodes [3, 4]"), "{}", o.stdout);
    let o = msrlab(&["--json", "verify-mds", &path]);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["mds"], json!(false));
    assert!(doc["failing"].as_array().unwrap().contains(&json!([3, 4])));
}

#[test]
fn search_scheme_lists_the_three_lines() {
    let o = msrlab(&["--json", "search-scheme", &fixture("fig1.json"), "--fail", "1"]);
    assert_eq!(o.code, 0);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["complete"], json!(true));
    let mut lines: Vec<Value> = doc["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            let h = s["helpers"].as_array().unwrap();
            assert_eq!(h[0], Value::Null);
            assert!(h[1..].iter().all(|x| x == &h[1]));
            h[1].clone()
        })
        .collect();
    lines.sort_by_key(|v| v.to_string());
    assert_eq!(lines, vec![json!([[0, 1]]), json!([[1, 0]]), json!([[1, 1]])]);
}

#[test]
fn scheme_search_verify_and_repair_pipeline() {
    let dir = TempDir::new().unwrap();
    let scheme = dir.path().join("scheme.json").display().to_string();
    let o = msrlab(&["search-scheme", &fixture("table1.json"), "--out", &scheme]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("bandwidth: 5 symbols per repair (optimal 5)"));

    let o = msrlab(&["verify-repair", &fixture("table1.json"), &scheme]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.matches(": ok, 5 symbols").count(), 4);

    let data = write(dir.path(), "data.json", &json!({"schema": 1, "systematic": [[1, 2], [3, 4], [5, 6], [0, 1]]}));
    for node in ["1", "2", "3", "4"] {
        let o = msrlab(&["repair", &fixture("table1.json"), &scheme, "--fail", node, "--data", &data]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.contains("symbols transmitted: 5"));
        assert!(o.stdout.contains("matches stored data: yes"));
    }
    let o = msrlab(&["--json", "repair", &fixture("table1.json"), &scheme, "--fail", "3", "--data", &data]);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["recovered"], json!([5, 6]));
    assert_eq!(doc["transmissions"].as_array().unwrap().len(), 5);
}

#[test]
fn broken_scheme_fails_verification() {
    let dir = TempDir::new().unwrap();
    // node 1 of Fig. 1 with mismatched helper lines
    let scheme = write(
        dir.path(),
        "s.json",
        &json!({"schema": 1, "nodes": [{"failed": 1, "helpers": [null, [[0, 1]], [[1, 0]], [[0, 1]]]}]}),
    );
    let o = msrlab(&["verify-repair", &fixture("fig1.json"), &scheme, "--fail", "1"]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("node 1: FAIL"));
    // node 2 has no repair at all
    let o = msrlab(&["verify-repair", &fixture("fig1.json"), &scheme]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("node 2: FAIL"));

    let data = write(dir.path(), "d.json", &json!({"systematic": [[1, 0], [1, 1]]}));
    let o = msrlab(&["repair", &fixture("fig1.json"), &scheme, "--fail", "1", "--data", &data]);
    assert_eq!(o.code, 1);
}

#[test]
fn fig1_repair_transcript() {
    let dir = TempDir::new().unwrap();
    let scheme = write(
        dir.path(),
        "s.json",
        &json!({"schema": 1, "nodes": [{"failed": 1, "helpers": [null, [[0, 1]], [[0, 1]], [[0, 1]]]}]}),
    );
    let data = write(dir.path(), "d.json", &json!({"schema": 1, "systematic": [[1, 0], [1, 1]]}));
    let o = msrlab(&["repair", &fixture("fig1.json"), &scheme, "--fail", "1", "--data", &data]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("recovered node 1: [1, 0]"));
    assert!(o.stdout.contains("symbols transmitted: 3"));
}

#[test]
fn reduce_theta_and_certify() {
    let dir = TempDir::new().unwrap();
    let sys = dir.path().join("sys.json").display().to_string();
    let o = msrlab(&["reduce-theta", &fixture("table1.json"), "--out", &sys]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("pairs: 3"));
    assert!(o.stdout.contains("subspace conditions: ok"));
    assert!(o.stdout.contains(": 4 (ell^2 = 4)"));

    let o = msrlab(&["certify", "--family", "upsilon", "--pairs", "1:2", &sys]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("2 matrices, rank 2, independent"));

    let o = msrlab(&["--json", "certify", "--family", "identity", &sys]);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["rank"], json!(4));
    assert_eq!(doc["independent"], json!(true));

    for args in [
        vec!["--family", "gamma", "--partition", "1,2,3"],
        vec!["--family", "sumdim"],
        vec!["--family", "sumdim", "--indices", "1,3"],
        vec!["--family", "r", "--pairs", "1:2"],
        vec!["--family", "t", "--odd", "1", "--even", "2"],
    ] {
        let mut full = vec!["certify"];
        full.extend(args.iter().copied());
        full.push(&sys);
        let o = msrlab(&full);
        assert_eq!(o.code, 0, "{args:?}: {}{}", o.stdout, o.stderr);
    }

    // other anchors give a valid system too
    for anchor in ["1", "2", "3"] {
        let o = msrlab(&["reduce-theta", &fixture("table1.json"), "--anchor", anchor]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("subspace conditions: ok"));
    }
}

#[test]
fn dependent_family_exits_one_with_dump() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        dir.path(),
        "sys.json",
        &json!({
            "schema": 1,
            "field": {"p": 2, "m": 1, "reduction": null},
            "ell": 2,
            "r": 2,
            "pairs": [
                {"phi": [[1, 0], [0, 1]], "s": [[1, 0]]},
                {"phi": [[1, 0], [0, 1]], "s": [[0, 1]]}
            ]
        }),
    );
    let o = msrlab(&["certify", "--family", "upsilon", "--pairs", "1:2", &sys]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("DEPENDENT"));
    assert!(o.stdout.contains("[[1, 0], [0, 1]]"));
    let o = msrlab(&["--json", "certify", "--family", "upsilon", "--pairs", "1:2", &sys]);
    assert_eq!(o.code, 1);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["family"]["members"].as_array().unwrap().len(), 2);
}

#[test]
fn bounds_report() {
    let o = msrlab(&["bounds", "--ell", "8192", "--r", "2"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("logsq: 365\n"));
    let o = msrlab(&["--json", "bounds", "--ell", "2", "--r", "2"]);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["schema"], json!(1));
    assert_eq!(doc["logsq"], json!(5));
    assert_eq!(doc["quadratic"], json!(4));
    for key in ["quadratic", "linear_r2", "logsq", "known_achievable", "bandwidth"] {
        assert!(doc.get(key).is_some(), "{key}");
    }
    let o = msrlab(&["--json", "bounds", "--ell", "4", "--r", "2", "--n", "6"]);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["bandwidth"], json!("10"));
}

#[test]
fn search_maxk_reports_and_writes_witness() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json").display().to_string();
    let o = msrlab(&["--json", "search-maxk", "--ell", "2", "--r", "2", "--p", "2", "--out", &out]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let doc: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["kmax"], json!(2));
    assert_eq!(doc["exhaustive"], json!(true));
    assert_eq!(doc["verified"], json!(true));
    let sys = system_from_json(&read_json(Path::new(&out)).unwrap()).unwrap();
    assert_eq!(sys.len(), 2);
    assert_eq!(system_to_json(&sys), doc["witness"]);

    // the witness certifies through the CLI as well
    let o = msrlab(&["certify", "--family", "identity", &out]);
    assert_eq!(o.code, 0);

    let o = msrlab(&["search-maxk", "--ell", "2", "--p", "2", "--m", "2", "--reduction", "1,1,1"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("over GF(2^2)"));
    let o = msrlab(&["search-maxk", "--ell", "2", "--p", "2", "--m", "2", "--reduction", "1,0,1"]);
    assert_eq!(o.code, 2);
}

#[test]
fn usage_and_format_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{not json").unwrap();
    let garbage = garbage.display().to_string();
    let bad_schema = write(dir.path(), "s.json", &json!({"schema": 7, "field": {"p": 2}}));
    let sys = dir.path().join("sys.json").display().to_string();
    assert_eq!(msrlab(&["reduce-theta", &fixture("table1.json"), "--out", &sys]).code, 0);

    for args in [
        vec!["verify-mds", "/nonexistent/x.json"],
        vec!["verify-mds", garbage.as_str()],
        vec!["verify-mds", bad_schema.as_str()],
        vec!["search-scheme", &fixture("fig1.json"), "--fail", "3"],
        vec!["search-scheme", &fixture("fig1.json"), "--fail", "0"],
        vec!["certify", "--family", "upsilon", &sys],
        vec!["certify", "--family", "upsilon", "--pairs", "1-2", &sys],
        vec!["certify", "--family", "upsilon", "--pairs", "1:9", &sys],
        vec!["certify", "--family", "lambda", "--partition", "1;x", &sys],
        vec!["bounds", "--ell", "0", "--r", "2"],
        vec!["bounds", "--ell", "4"],
        vec!["search-maxk", "--ell", "3", "--r", "2", "--p", "2"],
        vec!["search-maxk", "--ell", "2", "--p", "4"],
        vec!["no-such-command"],
        vec![],
    ] {
        let o = msrlab(&args);
        assert_eq!(o.code, 2, "{args:?}: {}", o.stdout);
        assert!(!o.stderr.is_empty());
    }
    let o = msrlab(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("search-maxk"));
}

#[test]
fn errors_number_indices_from_one() {
    let dir = TempDir::new().unwrap();
    let sys = dir.path().join("sys.json").display().to_string();
    assert_eq!(msrlab(&["reduce-theta", &fixture("table1.json"), "--out", &sys]).code, 0);
    let o = msrlab(&["certify", "--family", "upsilon", "--pairs", "1:2,2:3", &sys]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("index 2"), "{}", o.stderr);
}

fn field_strategy() -> impl Strategy<Value = Field> {
    prop::sample::select(vec![(2u64, 1u32, None), (3, 1, None), (7, 1, None), (2, 2, Some(vec![1u64, 1, 1])), (3, 2, Some(vec![1, 0, 1]))])
        .prop_map(|(p, m, red)| Field::new(p, m, red.as_deref()).unwrap())
}

fn random_matrix(f: &Field, rows: usize, cols: usize, seed: &mut u64) -> Matrix {
    let q = f.order();
    let data = (0..rows * cols)
        .map(|_| {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (*seed >> 33) % q
        })
        .collect();
    Matrix::from_vec(f, rows, cols, data).unwrap()
}

fn random_invertible(f: &Field, n: usize, seed: &mut u64) -> Matrix {
    loop {
        let m = random_matrix(f, n, n, seed);
        if m.is_invertible() {
            return m;
        }
    }
}

fn random_subspace(f: &Field, ell: usize, dim: usize, seed: &mut u64) -> Subspace {
    loop {
        let s = Subspace::span(&random_matrix(f, dim, ell, seed));
        if s.dim() == dim {
            return s;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_file_type_round_trips(
        f in field_strategy(),
        (half, k, r) in (1usize..=2, 1usize..=3, 1usize..=3),
        mut seed: u64,
    ) {
        let ell = half * r;
        let params = CodeParams::new(ell, k, r).unwrap();
        let enc = (0..r).map(|_| (0..k).map(|_| random_matrix(&f, ell, ell, &mut seed)).collect()).collect();
        let code = ArrayCode::new(&f, params, enc).unwrap();
        let text = json::to_string(&code_to_json(&code));
        prop_assert_eq!(&code_from_json(&serde_json::from_str(&text).unwrap()).unwrap(), &code);

        let mut scheme = RepairScheme::default();
        for i in 0..k {
            let helpers = (0..k + r)
                .map(|j| (j != i).then(|| random_matrix(&f, params.repair_dim(), ell, &mut seed)))
                .collect();
            scheme.insert(NodeRepair { failed: i, helpers });
        }
        let text = json::to_string(&scheme_to_json(&scheme));
        prop_assert_eq!(&scheme_from_json(&serde_json::from_str(&text).unwrap(), &code).unwrap(), &scheme);

        let fill = DataFill {
            systematic: (0..k).map(|_| random_matrix(&f, 1, ell, &mut seed).row(0).to_vec()).collect(),
        };
        let text = json::to_string(&data_to_json(&fill));
        prop_assert_eq!(&data_from_json(&serde_json::from_str(&text).unwrap(), &code).unwrap(), &fill);

        let pairs = (0..k)
            .map(|_| PhiPair {
                phi: random_invertible(&f, ell, &mut seed),
                s: random_subspace(&f, ell, ell / r, &mut seed),
            })
            .collect();
        let sys = PhiSystem::new(&f, ell, r, pairs).unwrap();
        let text = json::to_string(&system_to_json(&sys));
        prop_assert_eq!(&system_from_json(&serde_json::from_str(&text).unwrap()).unwrap(), &sys);
    }
}
