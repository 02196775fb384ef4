mod common;

use cmlv_core::mpcomplex::PrecisionCtx;
use cmlv_core::numoracle::{xi_p_numeric, OracleError, ORACLE_TOL_BITS};
use cmlv_core::traceexact::{cp_plus_exact, rational_digit, rational_ord};

fn smoke(d: i64) {
    let b = common::bundle(d);
    let ctx = PrecisionCtx::new(256 + 16 * b.params.degree as u32);
    for p in common::valid_primes(d, 41) {
        let r = xi_p_numeric(&b.params, &b, p, &ctx).unwrap();
        assert!(
            r.matched,
            "D = {d}, p = {p}: oracle {} disagrees",
            r.rounded
        );
        assert!(!r.rounded.is_zero(), "D = {d}, p = {p}: Theta_p vanishes");
        let (m, e) = r.residual.to_f64_exp();
        assert!(m == 0.0 || (m.abs().log2() + e as f64) < -(ORACLE_TOL_BITS as f64));
        assert_eq!(
            r.cp_plus,
            cp_plus_exact(&b.params, &b, p).unwrap(),
            "D = {d}, p = {p}"
        );
    }
}

#[test]
fn smoke_d3() {
    smoke(3);
}

#[test]
fn smoke_d5() {
    smoke(5);
}

#[test]
fn smoke_d17() {
    smoke(17);
    let b = common::bundle(17);
    let r = xi_p_numeric(&b.params, &b, 5, &PrecisionCtx::new(512)).unwrap();
    assert_eq!(rational_ord(&r.cp_plus, 5), Some(2));
    assert_eq!(rational_digit(&r.cp_plus, 5, 2), Some(3));
}

#[test]
fn smoke_dm14() {
    smoke(-14);
}

#[test]
fn rejects_large_and_invalid_primes() {
    let b = common::bundle(5);
    let ctx = PrecisionCtx::new(512);
    assert!(matches!(
        xi_p_numeric(&b.params, &b, 109, &ctx),
        Err(OracleError::PrimeTooLarge { .. })
    ));
    assert!(matches!(
        xi_p_numeric(&b.params, &b, 7, &ctx),
        Err(OracleError::Trace(_))
    ));
}
