use msrlab::code::{known, ArrayCode, CodeParams, DataFill};
use msrlab::repair::{execute_repair, verify_scheme, NodeRepair, RepairScheme};
use msrlab::search::{search_scheme, SearchConfig, Witness};
use msrlab::{Field, FieldElem, Matrix, Subspace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_fill(rng: &mut ChaCha8Rng, code: &ArrayCode) -> DataFill {
    let p = code.params();
    let q = code.field().order();
    DataFill {
        systematic: (0..p.k).map(|_| (0..p.ell).map(|_| rng.gen_range(0..q)).collect()).collect(),
    }
}

fn fig1_scheme() -> RepairScheme {
    let code = known::fig1();
    let line = Subspace::from_rows(code.field(), 2, &[[0, 1]]).unwrap();
    let mut scheme = RepairScheme::default();
    scheme.insert(NodeRepair::from_subspaces(
        0,
        vec![None, Some(line.clone()), Some(line.clone()), Some(line)],
    ));
    scheme
}

fn searched(code: &ArrayCode) -> RepairScheme {
    match search_scheme(code, &SearchConfig::for_code(code)).unwrap().witness {
        Witness::Scheme(s) => s,
        Witness::System(_) => unreachable!(),
    }
}

#[test]
fn fig1_node1_repairs_with_three_symbols() {
    let code = known::fig1();
    let scheme = fig1_scheme();
    assert!(verify_scheme(&code, &scheme, 0).unwrap().ok());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let fill = random_fill(&mut rng, &code);
        let nodes = code.encode(&fill).unwrap();
        let t = execute_repair(&code, &scheme, 0, &nodes).unwrap();
        assert_eq!(t.recovered, fill.systematic[0]);
        assert_eq!(t.total_symbols, 3);
    }
}

#[test]
fn table1_round_trips_with_searched_scheme() {
    let code = known::table1();
    let scheme = searched(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let fill = random_fill(&mut rng, &code);
        let nodes = code.encode(&fill).unwrap();
        for i in 0..4 {
            let t = execute_repair(&code, &scheme, i, &nodes).unwrap();
            assert_eq!(t.recovered, fill.systematic[i]);
            assert_eq!(t.total_symbols, 5);
        }
    }
}

#[test]
fn reconstruct_from_every_k_subset() {
    let code = known::table1();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fill = random_fill(&mut rng, &code);
    let nodes = code.encode(&fill).unwrap();
    for subset in msrlab::code::k_subsets(6, 4) {
        let surviving: Vec<(usize, Vec<FieldElem>)> = subset.iter().map(|&j| (j, nodes[j].clone())).collect();
        assert_eq!(code.reconstruct(&surviving).unwrap(), fill);
    }
}

/// A random two-parity code over GF(q) at ell = 2 with identity first
/// parity; MDS-ness is not required for the linearity check.
fn random_code(rng: &mut ChaCha8Rng, f: &Field, k: usize) -> ArrayCode {
    let q = f.order();
    let mut row2 = Vec::new();
    for _ in 0..k {
        row2.push(loop {
            let data = (0..4).map(|_| rng.gen_range(0..q)).collect();
            let m = Matrix::from_vec(f, 2, 2, data).unwrap();
            if m.is_invertible() {
                break m;
            }
        });
    }
    ArrayCode::new(
        f,
        CodeParams::new(2, k, 2).unwrap(),
        vec![vec![Matrix::identity(f, 2); k], row2],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn encode_is_linear(seed: u64, k in 1usize..=4, q in prop::sample::select(vec![2u64, 3, 7])) {
        let f = Field::prime(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_code(&mut rng, &f, k);
        let a = random_fill(&mut rng, &code);
        let b = random_fill(&mut rng, &code);
        let c = rng.gen_range(0..q);
        let combo = DataFill {
            systematic: a
                .systematic
                .iter()
                .zip(&b.systematic)
                .map(|(x, y)| x.iter().zip(y).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect())
                .collect(),
        };
        let (ea, eb, ec) = (code.encode(&a).unwrap(), code.encode(&b).unwrap(), code.encode(&combo).unwrap());
        for j in 0..code.params().n() {
            let expect: Vec<u64> = ea[j].iter().zip(&eb[j]).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect();
            prop_assert_eq!(&ec[j], &expect);
        }
    }

    /// Any scheme the search returns repairs every node exactly.
    #[test]
    fn searched_schemes_are_sound(seed: u64, k in 2usize..=3, q in prop::sample::select(vec![3u64, 5, 7])) {
        let f = Field::prime(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_code(&mut rng, &f, k);
        let Ok(res) = search_scheme(&code, &SearchConfig::for_code(&code)) else {
            return Ok(());
        };
        let Witness::Scheme(scheme) = res.witness else { unreachable!() };
        let fill = random_fill(&mut rng, &code);
        let nodes = code.encode(&fill).unwrap();
        for i in 0..k {
            prop_assert!(verify_scheme(&code, &scheme, i).unwrap().ok());
            let t = execute_repair(&code, &scheme, i, &nodes).unwrap();
            prop_assert_eq!(&t.recovered, &fill.systematic[i]);
            prop_assert_eq!(t.total_symbols, k + 1);
        }
    }
}
