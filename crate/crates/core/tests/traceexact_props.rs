mod common;

use cmlv_core::algprecomp::ZiPoly;
use cmlv_core::gaussint::GaussInt;
use cmlv_core::traceexact::{
    bn_leading_coefficient, bn_poly_exact, cp_plus_exact, newton_power_sums, parse_bn_fixtures,
    rational_digit, rational_ord, rational_residue, BnPoly, EXACT_P_MAX,
};
use proptest::prelude::*;
use rug::Integer;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn newton_matches_numeric_roots(g in common::monic_poly()) {
        let d = g.degree().unwrap();
        let s = newton_power_sums(&g, 2 * d + 2).unwrap();
        prop_assert_eq!(s.values[0].clone(), GaussInt::from_int(d as i64));
        prop_assert_eq!(common::power_sums_from_roots(&g, 2 * d + 2), Some(s.values));
    }
}

#[test]
fn newton_small_example() {
    let g = ZiPoly::from_integers(&[Integer::from(2), Integer::from(-3), Integer::from(1)]);
    let s = newton_power_sums(&g, 3).unwrap();
    let want: Vec<GaussInt> = [2, 3, 5].iter().map(|&v| GaussInt::from_int(v)).collect();
    assert_eq!(s.values, want);
}

#[test]
fn b_polynomial_laws() {
    assert_eq!(
        BnPoly::first().coeffs,
        vec![Integer::from(0), Integer::from(12)]
    );
    for d in [17i64, -14, 3, -3] {
        let mut b = BnPoly::first();
        for n in 1..=30 {
            assert_eq!(b.n, n);
            assert_eq!(b.coeffs.len(), n + 1);
            assert_eq!(*b.leading(), bn_leading_coefficient(n));
            assert!(b.has_parity());
            let next = b.next(d);
            assert_eq!(
                Integer::from(next.leading() / b.leading()),
                2 * (n as u64 + 2) * (2 * n as u64 + 3)
            );
            b = next;
        }
    }
}

#[test]
fn b13_matches_printed_polynomials() {
    let fixtures = parse_bn_fixtures(common::B13).unwrap();
    assert_eq!(
        fixtures.iter().map(|f| f.d_param).collect::<Vec<_>>(),
        vec![17, -14]
    );
    for fx in fixtures {
        assert_eq!(fx.coeffs.len(), 14);
        assert_eq!(
            bn_poly_exact(fx.d_param, 13).coeffs,
            fx.coeffs,
            "D = {}",
            fx.d_param
        );
    }
    let lead: Integer = (Integer::from(7496723869173u64) * Integer::from(1212046875u64)) << 24;
    assert_eq!(*bn_poly_exact(17, 13).leading(), lead);
}

#[test]
fn exact_values_at_small_primes() {
    let b17 = common::bundle(17);
    let c = cp_plus_exact(&b17.params, &b17, 5).unwrap();
    assert_eq!(rational_ord(&c, 5), Some(2));
    assert_eq!(rational_digit(&c, 5, 2), Some(3));

    let b14 = common::bundle(-14);
    let c = cp_plus_exact(&b14.params, &b14, 5).unwrap();
    assert_eq!(rational_ord(&c, 5), Some(2));
    assert_eq!(rational_digit(&c, 5, 2), Some(4));

    let c = cp_plus_exact(&b14.params, &b14, 29).unwrap();
    assert_eq!(rational_ord(&c, 29), Some(3));
    assert_eq!(rational_residue(&c, 29, 0, 4), Some(27 * 29u64.pow(3)));
}

#[test]
fn exact_valuations_are_nonnegative() {
    for d in [3i64, 5, 17, -14] {
        let b = common::bundle(d);
        for p in common::valid_primes(d, EXACT_P_MAX) {
            let c = cp_plus_exact(&b.params, &b, p).unwrap();
            assert!(c != 0, "D = {d}, p = {p}: c_p+ vanishes");
            assert!(*c.denom() > 0);
            assert!(rational_ord(&c, p).unwrap() >= 0, "D = {d}, p = {p}");
        }
    }
}

#[test]
fn exact_path_is_bounded() {
    let b = common::bundle(3);
    assert!(cp_plus_exact(&b.params, &b, 109).is_err());
    assert!(cp_plus_exact(&b.params, &b, 7).is_err());
    assert!(cp_plus_exact(&b.params, &b, 3).is_err());
}
