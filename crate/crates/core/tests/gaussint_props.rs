use cmlv_core::gaussint::{
    euler_phi, factor_with_unit, gcd, is_coprime, normalize_primary, quartic_symbol,
    ray_class_reps, GaussInt, IdealRep, ResidueRing,
};
use proptest::prelude::*;
use rug::Integer;

fn gi(re: i64, im: i64) -> GaussInt {
    GaussInt::new(re, im)
}

fn small() -> impl Strategy<Value = GaussInt> {
    (-1000i64..=1000, -1000i64..=1000).prop_map(|(a, b)| gi(a, b))
}

fn nonzero_up_to(bound: i64) -> impl Strategy<Value = GaussInt> {
    (-bound..=bound, -bound..=bound)
        .prop_filter("nonzero", |(a, b)| *a != 0 || *b != 0)
        .prop_map(|(a, b)| gi(a, b))
}

/// Primary Gaussian primes of norm below 400.
fn primary_primes() -> Vec<GaussInt> {
    let mut out = Vec::new();
    for a in 0i64..20 {
        for b in 0i64..20 {
            let z = gi(a, b);
            let n = z.norm();
            if !(3..400).contains(&n) || !z.is_odd() {
                continue;
            }
            let (_, f) = factor_with_unit(&z).unwrap();
            if f.len() == 1 && f[0].1 == 1 {
                out.push(normalize_primary(&z).unwrap());
            }
        }
    }
    out.sort_by_key(|p| p.norm());
    out.dedup();
    out
}

proptest! {
    #[test]
    fn norm_is_multiplicative(z in small(), w in small()) {
        prop_assert_eq!((&z * &w).norm(), z.norm() * w.norm());
    }

    #[test]
    fn factor_round_trip(z in nonzero_up_to(707).prop_filter("norm at most 10^6", |z| z.norm() <= 1_000_000)) {
        let (unit, factors) = factor_with_unit(&z).unwrap();
        let mut prod = unit.to_gauss();
        for (p, e) in &factors {
            prop_assert!(!p.is_unit());
            prod = &prod * &p.pow(*e);
        }
        prop_assert_eq!(prod, z);
    }

    #[test]
    fn gcd_divides_both(z in small(), w in nonzero_up_to(1000)) {
        let g = gcd(&z, &w).unwrap();
        prop_assert!(g.divides(&z) && g.divides(&w));
        let (zq, wq) = (z.div_exact(&g).unwrap(), w.div_exact(&g).unwrap());
        prop_assert!(is_coprime(&zq, &wq));
    }

    #[test]
    fn quartic_symbol_is_multiplicative(
        idx in 0usize..64,
        a in nonzero_up_to(200),
        b in nonzero_up_to(200),
    ) {
        let primes = primary_primes();
        let pi = &primes[idx % primes.len()];
        prop_assume!(is_coprime(&a, pi) && is_coprime(&b, pi));
        let ab = quartic_symbol(&(&a * &b), pi).unwrap();
        let prod = quartic_symbol(&a, pi).unwrap() * quartic_symbol(&b, pi).unwrap();
        prop_assert_eq!(ab, prod);
    }
}

#[test]
fn euler_phi_matches_enumeration() {
    for a in 1i64..45 {
        for b in 0i64..45 {
            let z = gi(a, b);
            if z.norm() > 2000 {
                continue;
            }
            let ring = ResidueRing::new(&z).unwrap();
            let units = ring.residues().filter(|r| is_coprime(r, &z)).count();
            let h = IdealRep::new(z.clone()).unwrap();
            assert_eq!(euler_phi(&h), units as u64, "h = {z}");
        }
    }
}

#[test]
fn ray_class_reps_are_a_transversal() {
    for f in [
        gi(5, 0),
        gi(3, 3),
        gi(12, 0),
        gi(-6, 6),
        gi(20, 0),
        gi(7, 7),
    ] {
        let fi = IdealRep::new(f.clone()).unwrap();
        let reps = ray_class_reps(&fi);
        assert_eq!(Integer::from(reps.len() * 4), euler_phi(&fi), "f = {f}");
        let ring = ResidueRing::new(&f).unwrap();
        let mut classes = std::collections::HashSet::new();
        for r in &reps {
            assert!(is_coprime(r.gen(), &f));
            for k in 0..4 {
                assert!(
                    classes.insert(ring.reduce(&r.gen().mul_i_pow(k))),
                    "f = {f}: {} repeats a class",
                    r.gen()
                );
            }
        }
    }
}

#[test]
fn spec_sized_conductors() {
    let two_1pi_17 = IdealRep::new(&gi(2, 2) * &gi(17, 0)).unwrap();
    assert_eq!(euler_phi(&two_1pi_17), 1024);
    assert_eq!(ray_class_reps(&two_1pi_17).len(), 256);
    assert_eq!(
        ray_class_reps(&IdealRep::new(gi(56, 0)).unwrap()).len(),
        384
    );
    assert_eq!(
        ray_class_reps(&IdealRep::new(gi(1, 1).pow(3)).unwrap()).len(),
        1
    );
    assert_eq!(euler_phi(&IdealRep::new(gi(5, 0)).unwrap()), 16);
}
