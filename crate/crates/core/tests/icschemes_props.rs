use cachekit::caching::{man_placement, yma_load, CachingInstance, DemandVector};
use cachekit::combinatorics::{binom, tuples};
use cachekit::gf2::BitVector;
use cachekit::icmap::{caching_to_ic, ICInstance, IcUser};
use cachekit::icschemes::{
    composite_selection_rate, composite_symmetric_rate, composite_to_linear, members, message_set, novel_feasibility, oneshot_simulate,
    yma_as_novel, Composite, CompositeAssignment, LinearSpec, MessageSet, DEFAULT_MAX_LPS,
};
use cachekit::scalar::{int, rat};
use cachekit::Rational;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example1() -> ICInstance {
    let side: [&[usize]; 6] = [&[3, 4], &[4, 5], &[5, 6], &[2, 3, 6], &[1, 4, 6], &[1, 2]];
    let users = side
        .iter()
        .enumerate()
        .map(|(j, a)| IcUser::new([j], a.iter().map(|m| m - 1)))
        .collect();
    ICInstance::unit(6, users).unwrap()
}

fn side_mask(ic: &ICInstance, j: usize) -> MessageSet {
    message_set(ic.user(j).side.iter().copied())
}

fn demand_mask(ic: &ICInstance, j: usize) -> MessageSet {
    message_set(ic.user(j).demand.iter().copied())
}

fn clearing_scale(ca: &CompositeAssignment) -> u64 {
    ca.rates.values().fold(1u64, |acc, s| acc.lcm(&s.denom().to_u64().unwrap()))
}

/// Linear embedding of one assignment; the certificate must cover `rates`.
fn check_embedding(ic: &ICInstance, ca: &CompositeAssignment, rates: &[Rational]) {
    let scale = clearing_scale(ca);
    let spec = composite_to_linear(ic, ca, scale).unwrap();

    // H(V | U_B) = Σ_{P ⊄ B} scale·S_P
    let mut probes: Vec<MessageSet> = (0..ic.user_count())
        .flat_map(|j| [side_mask(ic, j), side_mask(ic, j) | ca.decode_sets[j]])
        .collect();
    let n = ic.message_count();
    probes.extend((0..n).map(|i| (1u64 << n) - 1 - (1 << i)));
    probes.push(0);
    for b in probes {
        let expect: Rational = ca
            .rates
            .iter()
            .filter(|(&p, _)| p & !b != 0)
            .map(|(_, s)| s * int(scale as i64))
            .sum();
        assert_eq!(int(spec.conditional_entropy(b) as i64), expect, "B={b:b}");
    }

    let cert = novel_feasibility(ic, &spec, &ca.decode_sets).unwrap();
    assert!(cert.channel_bits as u64 <= scale);
    assert!(cert.supports_rates(rates), "certificate {:?} below {rates:?}", cert.rate);
}

/// Corollary 1 pipeline on one instance; returns the time-shared composite rate.
fn check_inclusion(ic: &ICInstance) -> Rational {
    let res = composite_symmetric_rate(ic, DEFAULT_MAX_LPS).unwrap();
    let single = &res.single;
    assert_eq!(single.assignment.symmetric_rate(ic).unwrap(), single.rate);
    check_embedding(ic, &single.assignment, &vec![single.rate.clone(); ic.message_count()]);
    assert!(res.rate >= single.rate);

    let mut mixture = vec![Rational::zero(); ic.message_count()];
    let mut total = Rational::zero();
    for c in &res.components {
        check_embedding(ic, &c.assignment, &c.rates);
        for (m, r) in mixture.iter_mut().zip(&c.rates) {
            *m += &c.weight * r;
        }
        total += &c.weight;
    }
    assert_eq!(total, int(1));
    assert_eq!(mixture.iter().min().unwrap(), &res.rate);
    res.rate
}

#[test]
fn example1_time_sharing_beats_one_selection_but_not_the_linear_code() {
    let ic = example1();
    let rate = check_inclusion(&ic);
    assert!(rate < rat(1, 3));
    assert!(rate > rat(1, 4));
    assert!(rate > composite_selection_rate(&ic, DEFAULT_MAX_LPS).unwrap().rate);
}

#[test]
fn inclusion_on_small_caching_reductions() {
    for n in 1..=3 {
        for k in 1..=3 {
            for t in 0..=k {
                let inst = CachingInstance::with_min_bits(n, k, t).unwrap();
                let p = man_placement(&inst).unwrap();
                for d in tuples(n, k) {
                    let d = DemandVector::new(d, n).unwrap();
                    let r = caching_to_ic(&p, &d).unwrap();
                    if r.ic.user_count() == 0 {
                        continue;
                    }
                    let rate = check_inclusion(&r.ic);
                    // one-bit sub-files: each MAN XOR is a composite at rate 1/binom(K,t+1)
                    assert!(rate >= rat(1, binom(k as i64, t as i64 + 1) as i64));
                }
            }
        }
    }
}

#[test]
fn yma_certificate_matches_load_formula() {
    for n in 1..=5 {
        for k in 1..=5 {
            for t in 0..=k {
                let inst = CachingInstance::with_min_bits(n, k, t).unwrap();
                let p = man_placement(&inst).unwrap();
                let worst: Vec<usize> = (0..k).map(|u| u % n).collect();
                let d = DemandVector::new(worst, n).unwrap();
                let nv = yma_as_novel(&p, &d).unwrap();
                let cert = novel_feasibility(&nv.reduction.ic, &nv.spec, &nv.decode_sets).unwrap();
                assert!(cert.is_feasible(), "N={n} K={k} t={t}");
                assert_eq!(nv.certified_load(&cert, inst.file_bits), yma_load::<Rational>(n, k, t), "N={n} K={k} t={t}");
            }
        }
    }
}

#[test]
fn yma_certificate_examples() {
    let load = |n, k, t, d: &[usize]| {
        let inst = CachingInstance::with_min_bits(n, k, t).unwrap();
        let p = man_placement(&inst).unwrap();
        let nv = yma_as_novel(&p, &DemandVector::from_one_based(d, n).unwrap()).unwrap();
        let cert = novel_feasibility(&nv.reduction.ic, &nv.spec, &nv.decode_sets).unwrap();
        nv.certified_load(&cert, inst.file_bits)
    };
    assert_eq!(load(3, 3, 1, &[1, 2, 3]), int(1));
    assert_eq!(load(2, 4, 1, &[1, 2, 1, 2]), rat(5, 4));
    for k in 1..=6 {
        assert_eq!(load(1, k, 1, &vec![1; k]), yma_load::<Rational>(1, k, 1));
    }
}

#[test]
fn yma_specs_decode_one_shot() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=4 {
        for k in 1..=4 {
            for t in 0..=k {
                let inst = CachingInstance::with_min_bits(n, k, t).unwrap();
                let p = man_placement(&inst).unwrap();
                for d in tuples(n, k) {
                    let d = DemandVector::new(d, n).unwrap();
                    let nv = yma_as_novel(&p, &d).unwrap();
                    let msgs: Vec<BitVector> = nv
                        .spec
                        .bits()
                        .iter()
                        .map(|&b| BitVector::from_bools(&(0..b).map(|_| rng.gen()).collect::<Vec<bool>>()))
                        .collect();
                    let ok = oneshot_simulate(&nv.reduction.ic, &nv.spec, &msgs).unwrap();
                    assert!(ok.iter().all(|&x| x), "N={n} K={k} t={t} d={:?}", d.as_slice());
                }
            }
        }
    }
}

#[test]
fn full_caching_is_vacuous() {
    let inst = CachingInstance::with_min_bits(2, 3, 3).unwrap();
    let p = man_placement(&inst).unwrap();
    let nv = yma_as_novel(&p, &DemandVector::from_one_based(&[1, 2, 1], 2).unwrap()).unwrap();
    assert_eq!(nv.reduction.ic.user_count(), 0);
    let msgs: Vec<BitVector> = nv.spec.bits().iter().map(|&b| BitVector::zeros(b)).collect();
    assert!(oneshot_simulate(&nv.reduction.ic, &nv.spec, &msgs).unwrap().is_empty());
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> ICInstance {
    let users = (0..rng.gen_range(1..=4))
        .map(|_| {
            let d = rng.gen_range(0..n);
            let mut demand = vec![d];
            let mut side = Vec::new();
            for m in (0..n).filter(|&m| m != d) {
                match rng.gen_range(0..4) {
                    0 => demand.push(m),
                    1 | 2 => side.push(m),
                    _ => {}
                }
            }
            IcUser::new(demand, side)
        })
        .collect();
    ICInstance::unit(n, users).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng, bits: &[usize]) -> LinearSpec {
    let n = bits.len();
    let composites = (0..rng.gen_range(0..=4))
        .map(|_| {
            let subset: MessageSet = rng.gen_range(1..1u64 << n);
            let width: usize = members(subset).map(|i| bits[i]).sum();
            let rows = (0..rng.gen_range(1..=2))
                .map(|_| BitVector::from_bools(&(0..width).map(|_| rng.gen()).collect::<Vec<bool>>()))
                .collect();
            Composite { subset, rows }
        })
        .collect();
    LinearSpec::new(bits.to_vec(), composites).unwrap()
}

fn split(x: u64, bits: &[usize]) -> Vec<BitVector> {
    let mut shift = 0;
    bits.iter()
        .map(|&b| {
            let v = BitVector::from_bools(&(0..b).map(|i| x >> (shift + i) & 1 == 1).collect::<Vec<_>>());
            shift += b;
            v
        })
        .collect()
}

#[test]
fn certified_specs_decode_for_every_realization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..300 {
        let n = rng.gen_range(2..=5);
        let bits: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
        let total: usize = bits.iter().sum();
        if total > 12 {
            continue;
        }
        let ic = random_instance(&mut rng, n);
        let spec = random_spec(&mut rng, &bits);
        let decode: Vec<MessageSet> = (0..ic.user_count()).map(|j| demand_mask(&ic, j)).collect();
        let cert = novel_feasibility(&ic, &spec, &decode).unwrap();
        let outcomes: Vec<Vec<bool>> = (0..1u64 << total)
            .map(|x| oneshot_simulate(&ic, &spec, &split(x, &bits)).unwrap())
            .collect();
        if cert.is_feasible() {
            feasible += 1;
            assert!(outcomes.iter().flatten().all(|&ok| ok));
        } else {
            infeasible += 1;
            // a violated constraint names a user who is never sure of its demand
            for &v in &cert.violations {
                let j = cert.constraints[v].user;
                assert!(outcomes.iter().all(|o| !o[j]));
            }
        }
    }
    assert!(feasible > 10 && infeasible > 10, "{feasible} feasible, {infeasible} infeasible");
}

#[test]
fn budgets_shrink_as_side_information_grows() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let bits: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        let spec = random_spec(&mut rng, &bits);
        let mut given: MessageSet = 0;
        let mut last = spec.conditional_entropy(0);
        for m in rand::seq::index::sample(&mut rng, n, n) {
            given |= 1 << m;
            let h = spec.conditional_entropy(given);
            assert!(h <= last);
            last = h;
        }
        assert_eq!(last, 0);
    }
}
