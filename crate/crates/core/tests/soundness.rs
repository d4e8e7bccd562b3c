use sperner_core::bounds::{best_bound, recheck};
use sperner_core::families::{max_family, satisfies, ConstraintSpec, Kind};
use sperner_core::padic::PrimePower;

fn check(spec: &ConstraintSpec) {
    let report = best_bound(spec).unwrap();
    let bound = u64::try_from(&report.minimum.bound.value).unwrap();
    let r = max_family(spec, None).unwrap();
    assert!(r.exact);
    assert!(satisfies(spec, &r.witness).unwrap());
    assert!(
        r.max_size as u64 <= bound,
        "{:?}: brute force {} exceeds {}",
        spec,
        r.max_size,
        report.minimum
    );
    for cert in &report.applicable {
        assert!(recheck(spec, cert).unwrap(), "{} does not recheck", cert.theorem_id);
        assert!(cert.bound.recompute());
    }
}

#[test]
fn non_modular_kinds_respect_bounds() {
    for kind in [Kind::DiffSperner, Kind::CloseSperner, Kind::Intersecting, Kind::Hamming] {
        for n in 1..=7usize {
            let top = n as u64 + 1;
            for mask in 1u32..(1 << top) {
                let l: Vec<u64> = (0..top).filter(|i| mask >> i & 1 == 1).collect();
                if l.len() > 3 && kind != Kind::Intersecting {
                    continue;
                }
                if let Ok(spec) = ConstraintSpec::new(kind, n, l, None) {
                    check(&spec);
                }
            }
        }
    }
}

#[test]
fn uniform_kind_respects_bounds() {
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let pp = PrimePower::from_modulus(q).unwrap();
        for k in 0..q {
            for n in 1..=8usize {
                check(&ConstraintSpec::uniform(n, pp, k).unwrap());
            }
        }
    }
}

#[test]
fn modular_closed_sets_at_larger_n() {
    for q in [4u64, 8, 9] {
        let pp = PrimePower::from_modulus(q).unwrap();
        for (lo, hi) in [(1, 1), (1, 2), (2, 3), (1, q - 1)] {
            check(&ConstraintSpec::new(Kind::DiffSperner, 9, lo..=hi, Some(pp)).unwrap());
        }
    }
}
