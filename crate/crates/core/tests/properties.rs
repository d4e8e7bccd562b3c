use num_bigint::BigInt;
use proptest::prelude::*;
use sperner_core::bounds::{best_bound, binomial};
use sperner_core::closure::{is_q_closed, mu, q_closure, IntervalL};
use sperner_core::families::{
    max_family, popcount, push_to_middle, satisfies, set_from_elements, ConstraintSpec, Kind, Mask, SetFamily,
};
use sperner_core::padic::{vp, vp_factorial, Prime, PrimePower, Valuation};
use sperner_core::seppoly::{canonical_interval_poly, separates};

fn pp(q: u64) -> PrimePower {
    PrimePower::from_modulus(q).unwrap()
}

fn fin(v: Valuation) -> u64 {
    v.finite().unwrap()
}

#[test]
fn hamming_shift_upgrade_fails_on_small_case() {
    // {}, {1,2}, {1,3}, {2,3}: every distance is 2, four members, n = 3.
    let fam = SetFamily::new(3, vec![0, 0b011, 0b101, 0b110]).unwrap();
    for modulus in [None, Some(pp(3))] {
        let spec = ConstraintSpec::new(Kind::Hamming, 3, [2], modulus).unwrap();
        assert!(satisfies(&spec, &fam).unwrap());
        let r = max_family(&spec, None).unwrap();
        assert_eq!(r.max_size, 4);
        let b = best_bound(&spec).unwrap();
        assert!(u64::try_from(&b.minimum.bound.value).unwrap() >= 4);
        assert!(binomial(2, 0) + binomial(2, 1) < (4u32).into());
    }
}

#[test]
fn shifted_uniform_construction_is_intersecting() {
    for q in [4u64, 5, 8, 9] {
        for a in 1..q {
            for s in 1..q - a + 1 {
                for n in (a + s) as usize..=8 {
                    let tail: Mask = ((n - a as usize)..n).fold(0, |m, j| m | 1 << j);
                    let members: Vec<Mask> =
                        (0..1u32 << (n - a as usize)).filter(|&m| popcount(m) == s as usize).map(|m| m | tail).collect();
                    let fam = SetFamily::new(n, members).unwrap();
                    let spec = ConstraintSpec::new(Kind::Intersecting, n, a..a + s, Some(pp(q))).unwrap();
                    assert!(satisfies(&spec, &fam).unwrap(), "q={q} a={a} s={s} n={n}");
                    let bound = best_bound(&spec).unwrap().minimum.bound.value;
                    assert!(binomial((n - a as usize) as u64, s) <= bound);
                }
            }
        }
    }
}

#[test]
fn progressions_give_separating_products() {
    let mut checked = 0;
    for q in [4u64, 8, 9, 16, 25, 27] {
        let pq = pp(q);
        let p = pq.p();
        for d in 1..q {
            for a in 1..q {
                for s in 1..q {
                    if a + (s - 1) * d > q - 1 {
                        break;
                    }
                    let l: Vec<u64> = (0..s).map(|i| a + i * d).collect();
                    let sum: u64 = l.iter().map(|&x| fin(vp(p, x))).sum();
                    let vd = fin(vp(p, d));
                    let threshold = ((s - 1) * vd + pq.k() as u64).max(s * vd + fin(vp_factorial(p, s)) + 1);
                    if sum < threshold {
                        let g = canonical_interval_poly(l.iter().copied());
                        assert!(separates(&pq, &g, &BigInt::from(0), &l), "q={q} L={l:?}");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn small_valuation_sets_give_separating_products() {
    for q in [8u64, 9, 16, 27] {
        let pq = pp(q);
        for mask in 1u32..(1 << (q - 1)).min(1 << 12) {
            let l: Vec<u64> = (1..q).filter(|&x| mask >> (x - 1) & 1 == 1).collect();
            let sum: u64 = l.iter().map(|&x| fin(vp(pq.p(), x))).sum();
            if sum < pq.k() as u64 {
                let g = canonical_interval_poly(l.iter().copied());
                assert!(separates(&pq, &g, &BigInt::from(0), &l), "q={q} L={l:?}");
            }
        }
    }
}

fn permute(m: Mask, perm: &[usize]) -> Mask {
    (0..perm.len()).filter(|&j| m >> j & 1 == 1).fold(0, |acc, j| acc | 1 << perm[j])
}

fn spec_strategy() -> impl Strategy<Value = ConstraintSpec> {
    (0usize..4, prop::sample::select(vec![2u64, 3, 4, 5]), 2usize..=6, prop::collection::btree_set(0u64..6, 1..3))
        .prop_filter_map("valid spec", |(k, q, n, l)| {
            let kind = [Kind::DiffSperner, Kind::CloseSperner, Kind::Intersecting, Kind::Hamming][k];
            let modulus = if kind == Kind::CloseSperner { None } else { Some(pp(q)) };
            ConstraintSpec::new(kind, n, l, modulus).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabelling_preserves_witnesses(spec in spec_strategy(), seed in any::<u64>()) {
        let r = max_family(&spec, None).unwrap();
        let mut perm: Vec<usize> = (0..spec.n).collect();
        let mut state = seed;
        for i in (1..perm.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let moved = SetFamily::new(spec.n, r.witness.members().iter().map(|&m| permute(m, &perm)).collect()).unwrap();
        prop_assert!(satisfies(&spec, &moved).unwrap());
        prop_assert_eq!(moved.len(), r.max_size);
    }

    #[test]
    fn closure_contains_and_is_closed(qi in 0usize..5, lo in 1u64..27, len in 0u64..27) {
        let q = [4u64, 8, 9, 25, 27][qi];
        prop_assume!(lo < q && lo + len < q);
        let p = pp(q);
        let l = IntervalL::new(&p, lo, lo + len).unwrap();
        let c = q_closure(&p, &l).unwrap();
        prop_assert!(c.interval.contains(&l));
        prop_assert!(is_q_closed(&p, &c.interval));
        prop_assert!(c.length <= mu(&p, l.size()).unwrap());
    }

    #[test]
    fn push_preserves_size_and_band(n in 2usize..=9, seed in any::<u64>()) {
        let mut state = seed;
        let mut members: Vec<Mask> = Vec::new();
        for _ in 0..12 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let m = (state >> 20) as Mask & ((1 << n) - 1);
            if members.iter().all(|&x| x & m != x && x & m != m) {
                members.push(m);
            }
        }
        let fam = SetFamily::new(n, members).unwrap();
        for s in 0..=n / 2 {
            let out = push_to_middle(&fam, s).unwrap();
            prop_assert_eq!(out.len(), fam.len());
            prop_assert!(out.is_antichain());
            prop_assert!(out.members().iter().all(|&m| popcount(m) >= s && popcount(m) <= n - s));
        }
    }

    #[test]
    fn legendre_matches_product(p in prop::sample::select(vec![2u64, 3, 5, 7]), s in 0u64..200) {
        let prime = Prime::new(p).unwrap();
        let direct: u64 = (1..=s).map(|i| fin(vp(prime, i))).sum();
        prop_assert_eq!(fin(vp_factorial(prime, s)), direct);
    }
}

#[test]
fn singletons_fill_the_bound_at_two() {
    for n in 3..=8 {
        let spec = ConstraintSpec::new(Kind::DiffSperner, n, [1], Some(pp(2))).unwrap();
        let fam = SetFamily::new(n, (1..=n).map(|i| set_from_elements(&[i])).collect()).unwrap();
        assert!(satisfies(&spec, &fam).unwrap());
        assert_eq!(u64::try_from(&best_bound(&spec).unwrap().minimum.bound.value).unwrap(), n as u64);
    }
}
