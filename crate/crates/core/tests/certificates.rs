//! Every certificate builder must produce an independent family on every
//! operator system the search and reduction pipelines produce.

use std::sync::OnceLock;

use msrlab::certificates::{
    build_gamma, build_identity_theta, build_lambda, build_r, build_t, build_upsilon, check_corollary1,
    sum_dim_check,
};
use msrlab::code::{k_subsets, known};
use msrlab::reduction::{check_constant_conditions, theta_reduce, PhiSystem};
use msrlab::search::{search_max_k, search_scheme, SearchConfig, Witness};
use msrlab::{family_independent, Field, Subspace};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn searched(q: u64, ell: usize, budget: u64, symmetry_fix: bool) -> PhiSystem {
    let f = Field::prime(q).unwrap();
    let cfg = SearchConfig::max_k(&f, ell, 2)
        .unwrap()
        .with_budget(budget)
        .with_symmetry_fix(symmetry_fix);
    match search_max_k(&cfg).unwrap().witness {
        Witness::System(s) => s,
        Witness::Scheme(_) => unreachable!(),
    }
}

fn reduced(code: &msrlab::code::ArrayCode) -> PhiSystem {
    let Witness::Scheme(scheme) = search_scheme(code, &SearchConfig::for_code(code)).unwrap().witness else {
        unreachable!()
    };
    theta_reduce(code, &scheme, None).unwrap()
}

fn systems() -> &'static [PhiSystem] {
    static POOL: OnceLock<Vec<PhiSystem>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut pool = Vec::new();
        for q in [2, 3, 7] {
            pool.push(searched(q, 2, 1_000_000, true));
            pool.push(searched(q, 2, 1_000_000, false));
        }
        pool.push(searched(2, 4, 1_000_000, true));
        pool.push(searched(2, 4, 5_000, false));
        pool.push(searched(3, 4, 3_000, true));
        pool.push(searched(7, 4, 5_000, true));
        pool.push(reduced(&known::table1()));
        pool.push(reduced(&known::fig1()));
        for s in &pool {
            assert!(check_constant_conditions(s, None).unwrap().ok());
        }
        pool
    })
}

fn meets_trivially(sys: &PhiSystem, a: usize, b: usize) -> bool {
    sys.s(a).meets_trivially(sys.s(b)).unwrap()
}

/// Every set of disjoint pairs with complementary subspaces.
fn matchings(sys: &PhiSystem) -> Vec<Vec<(usize, usize)>> {
    fn go(sys: &PhiSystem, from: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        out.push(cur.clone());
        for a in from..sys.len() {
            if used[a] {
                continue;
            }
            for b in a + 1..sys.len() {
                if used[b] || !meets_trivially(sys, a, b) {
                    continue;
                }
                used[a] = true;
                used[b] = true;
                cur.push((a, b));
                go(sys, a + 1, used, cur, out);
                cur.pop();
                used[a] = false;
                used[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(sys, 0, &mut vec![false; sys.len()], &mut Vec::new(), &mut out);
    out
}

#[test]
fn pool_is_nontrivial() {
    let pool = systems();
    let sizes: Vec<usize> = pool.iter().map(PhiSystem::len).collect();
    // exhaustive ell = 2 results: GF(2) 2, GF(3) 3, GF(7) 3; Table I gives 3
    assert_eq!(&sizes[..6], &[2, 2, 3, 3, 3, 3]);
    assert_eq!(sizes[6], 4);
    assert_eq!(sizes[10], 3);
}

#[test]
fn identity_theta_is_independent_everywhere() {
    for sys in systems() {
        let fam = build_identity_theta(sys).unwrap();
        assert_eq!(fam.members.len(), sys.len() + 1);
    }
    // the Table I reduction meets the ell^2 bound with equality
    let table1 = &systems()[10];
    assert_eq!(build_identity_theta(table1).unwrap().rank().unwrap(), 4);
}

#[test]
fn upsilon_and_r_on_every_matching() {
    for sys in systems() {
        for m in matchings(sys) {
            let ups = build_upsilon(sys, &m).unwrap();
            assert_eq!(ups.members.len(), 1 << m.len());
            assert!(family_independent(&ups.matrices()).unwrap());

            let paired: Vec<usize> = m.iter().flat_map(|&(a, b)| [a, b]).collect();
            let rest: Vec<usize> = (0..sys.len()).filter(|i| !paired.contains(i)).collect();
            // T over every split of the rest into two intersecting halves
            for size in 1..=rest.len() / 2 {
                for odd in k_subsets(rest.len(), size) {
                    let odd: Vec<usize> = odd.iter().map(|&x| rest[x]).collect();
                    let others: Vec<usize> = rest.iter().copied().filter(|i| !odd.contains(i)).collect();
                    for even in k_subsets(others.len(), size) {
                        let even: Vec<usize> = even.iter().map(|&x| others[x]).collect();
                        let t = build_t(sys, &odd, &even).unwrap();
                        let c1 = check_corollary1(sys, &t).unwrap();
                        assert!(c1.holds(), "corollary fails on {odd:?} x {even:?}");
                        if !c1.independent {
                            let (i, j) = c1.witness.unwrap();
                            assert!(meets_trivially(sys, i, j));
                        }
                        if c1.hypothesis {
                            let r = build_r(sys, &m, &t).unwrap();
                            assert_eq!(r.members.len(), (size * size) << m.len());
                        }
                    }
                }
            }
            let empty_t = build_t(sys, &[], &[]).unwrap();
            let r = build_r(sys, &m, &empty_t).unwrap();
            assert_eq!(r.matrices(), ups.matrices());
        }
    }
}

#[test]
fn sum_dimension_on_small_subsets() {
    for sys in systems() {
        let lg = sys.ell().trailing_zeros() as usize;
        for n in 1..=(lg + 2).min(sys.len()) {
            for subset in k_subsets(sys.len(), n) {
                let c = sum_dim_check(sys, &subset).unwrap();
                assert!(c.ok, "{subset:?}: dim {} < {}", c.dim, c.bound);
            }
        }
    }
}

/// Random set partitions of a random subset of the indices.
fn random_parts(rng: &mut ChaCha8Rng, k: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..k).collect();
    idx.shuffle(rng);
    let take = rng.gen_range(parts.min(k)..=k);
    let mut out = vec![Vec::new(); parts];
    for (n, &i) in idx[..take].iter().enumerate() {
        let slot = if n < parts { n } else { rng.gen_range(0..parts) };
        out[slot].push(i);
    }
    out.retain(|p| !p.is_empty());
    out
}

fn spans(sys: &PhiSystem, part: &[usize]) -> bool {
    let mut sum = Subspace::zero(sys.field(), sys.ell());
    for &i in part {
        sum = sum.sum(sys.s(i)).unwrap();
    }
    sum.is_full()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lambda_families_are_independent(which in 0usize..12, seed: u64, parts in 1usize..=3) {
        let sys = &systems()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let partition = random_parts(&mut rng, sys.len(), parts);
        if partition.iter().all(|p| spans(sys, p)) {
            let fam = build_lambda(sys, &partition).unwrap();
            prop_assert_eq!(fam.members.len(), 1 << partition.len());
            prop_assert!(family_independent(&fam.matrices()).unwrap());
        } else {
            prop_assert!(build_lambda(sys, &partition).is_err());
        }
    }

    #[test]
    fn gamma_families_are_independent(which in 0usize..12, seed: u64, t in 1usize..=3) {
        let sys = &systems()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = sys.len() / t;
        prop_assume!(size >= 1);
        let size = rng.gen_range(1..=size);
        let mut idx: Vec<usize> = (0..sys.len()).collect();
        idx.shuffle(&mut rng);
        let partition: Vec<Vec<usize>> = idx[..t * size].chunks(size).map(<[usize]>::to_vec).collect();
        let fam = build_gamma(sys, &partition).unwrap();
        prop_assert!(family_independent(&fam.matrices()).unwrap());
        if t == 1 {
            prop_assert_eq!(fam.members.len(), size);
        }
        if t == 2 {
            // the pairs in Gamma are exactly those a T family would need
            let expected = partition[0]
                .iter()
                .flat_map(|&a| partition[1].iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| !meets_trivially(sys, a, b))
                .count();
            prop_assert_eq!(fam.members.len(), expected);
        }
    }
}
