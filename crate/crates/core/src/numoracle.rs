//! Independent numeric evaluation of `Ξ_p = Σ_𝔟 B_{(p−3)/2}(u_𝔟)·℘′_𝔟`
//! straight from the conjugate points, bypassing `G`, `J`, Newton's
//! identities and the reduction modulo `G`.

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::algprecomp::{conjugate_points, PrecompBundle, PrecompError};
use crate::curvefam::CurveParams;
use crate::gaussint::GaussInt;
use crate::mpcomplex::{BigComplex, PrecisionCtx};
use crate::traceexact::{
    bn_poly_exact, check_prime, cp_from_xi, xi_p_exact, TraceError, EXACT_P_MAX,
};

/// Distance to ℤ[i] (as a power of two) below which rounding is accepted.
pub const ORACLE_TOL_BITS: u32 = 32;
const MAX_ORACLE_PREC: u32 = 1 << 17;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Precomp(#[from] PrecompError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("p = {p} exceeds the oracle bound {max}")]
    PrimeTooLarge { p: u64, max: u64 },
    #[error("Ξ_{p} did not round to ℤ[i] below {prec} bits (distance 2^{log2_dist:.1})")]
    Precision { p: u64, prec: u32, log2_dist: f64 },
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub p: u64,
    pub theta_numeric: BigComplex,
    /// `Ξ_p` rounded to ℤ[i] (`Ξ_p` is an algebraic integer, so no denominator).
    pub rounded: GaussInt,
    /// Distance from `theta_numeric` to `rounded`.
    pub residual: Float,
    /// Precision at which rounding succeeded.
    pub prec_bits: u32,
    /// Rounded value equals the exact-path `Ξ_p`.
    pub matched: bool,
    /// `c_p⁺` recomputed from the rounded value.
    pub cp_plus: Rational,
}

fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        let (m, e) = x.to_f64_exp();
        m.abs().log2() + e as f64
    }
}

/// `Σ_𝔟 B_n(u_𝔟)·℘′_𝔟` at one precision.
fn theta_at(params: &CurveParams, bn: &[Integer], prec: u32) -> Result<BigComplex, OracleError> {
    let ctx = PrecisionCtx::new(prec);
    let pts = conjugate_points(params, &ctx)?;
    let mut acc = BigComplex::zero(prec);
    for pt in &pts {
        let mut b = BigComplex::zero(prec);
        for c in bn.iter().rev() {
            b = &(&b * &pt.u) + &BigComplex::from_gauss(prec, &GaussInt::from_int(c.clone()));
        }
        acc = &acc + &(&b * &pt.v);
    }
    Ok(acc)
}

/// Evaluates `Ξ_p` numerically, starting at `ctx.prec_bits` and doubling
/// until it rounds to ℤ[i] with a margin, then compares with the exact path.
pub fn xi_p_numeric(
    params: &CurveParams,
    bundle: &PrecompBundle,
    p: u64,
    ctx: &PrecisionCtx,
) -> Result<OracleReport, OracleError> {
    check_prime(params, p)?;
    if p > EXACT_P_MAX {
        return Err(OracleError::PrimeTooLarge {
            p,
            max: EXACT_P_MAX,
        });
    }
    let bn = bn_poly_exact(params.d_param, ((p - 3) / 2) as usize);
    let mut prec = ctx.prec_bits;
    let mut last = f64::INFINITY;
    while prec <= MAX_ORACLE_PREC {
        let theta = theta_at(params, &bn.coeffs, prec)?;
        let (rounded, dist) = theta.round_to_gauss();
        let magnitude = log2_abs(&theta.abs()).max(0.0);
        last = log2_abs(&dist);
        // need the value itself well inside the working precision
        let enough = magnitude + (ORACLE_TOL_BITS as f64) + 64.0 < prec as f64;
        if enough && last < -(ORACLE_TOL_BITS as f64) {
            let (xi_num, xi_den) = xi_p_exact(bundle, p);
            let matched = rounded.mul_int(&xi_den) == xi_num;
            let cp_plus = cp_from_xi(params, p, &rounded, &Integer::from(1))?;
            return Ok(OracleReport {
                p,
                theta_numeric: theta,
                rounded,
                residual: dist,
                prec_bits: prec,
                matched,
                cp_plus,
            });
        }
        prec *= 2;
    }
    Err(OracleError::Precision {
        p,
        prec: prec / 2,
        log2_dist: last,
    })
}
