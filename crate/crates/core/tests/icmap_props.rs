use cachekit::caching::{man_placement, CachingInstance, DemandVector, Placement};
use cachekit::combinatorics::tuples;
use cachekit::icmap::{
    acyclic_bound, build_digraph, caching_to_ic, is_acyclic, is_acyclic_dfs, lemma1_set, max_acyclic_bound,
    DEFAULT_VERTEX_CAP,
};
use cachekit::Rational;
use itertools::Itertools;

/// Every sub-file of every file present, one bit each.
fn full_placement(n: usize, k: usize) -> Placement {
    Placement::from_lengths(n, k, 1 << k, Rational::new(n.into(), 2.into()), |_, _| 1).unwrap()
}

/// Ordered user sequences whose demanded files are distinct.
fn orders(d: &DemandVector) -> Vec<Vec<usize>> {
    let k = d.users();
    (1..=k)
        .flat_map(|len| (0..k).permutations(len))
        .filter(|u| u.iter().map(|&x| d.file_of(x)).all_unique())
        .collect()
}

#[test]
fn lemma1_sets_are_acyclic() {
    let mut checked = 0;
    for n in 1..=4 {
        for k in 1..=4 {
            let p = full_placement(n, k);
            for d in tuples(n, k) {
                let d = DemandVector::new(d, n).unwrap();
                let r = caching_to_ic(&p, &d).unwrap();
                let g = build_digraph(&r.ic);
                for u in orders(&d) {
                    let s = r.select(&g, &lemma1_set(&d, &u).unwrap()).unwrap();
                    assert!(is_acyclic(&g, &s.0).unwrap(), "d={:?} u={u:?}", d.as_slice());
                    assert!(is_acyclic_dfs(&g, &s.0).unwrap());
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 8786);
}

#[test]
fn max_acyclic_dominates_lemma1() {
    let mut cases: Vec<(Placement, usize)> = Vec::new();
    for n in 1..=3 {
        for k in 1..=3 {
            cases.push((full_placement(n, k), n));
        }
    }
    for t in 0..=4 {
        let inst = CachingInstance::with_min_bits(2, 4, t).unwrap();
        cases.push((man_placement(&inst).unwrap(), 2));
    }
    for (p, n) in cases {
        for d in tuples(n, p.users()) {
            let d = DemandVector::new(d, n).unwrap();
            let r = caching_to_ic(&p, &d).unwrap();
            let g = build_digraph(&r.ic);
            if g.vertex_count() == 0 || g.vertex_count() > DEFAULT_VERTEX_CAP {
                continue;
            }
            let (best, set) = max_acyclic_bound(&g, DEFAULT_VERTEX_CAP).unwrap();
            assert!(is_acyclic(&g, &set.0).unwrap());
            assert_eq!(acyclic_bound(&g, &set).unwrap(), best);
            for u in orders(&d) {
                let s = r.select(&g, &lemma1_set(&d, &u).unwrap()).unwrap();
                assert!(best >= acyclic_bound(&g, &s).unwrap());
            }
        }
    }
}
