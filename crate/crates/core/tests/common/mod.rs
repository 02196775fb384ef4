//! Bundles shared by the integration tests, cached on disk under the cargo
//! target directory so each curve is built once per checkout.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use cmlv_core::algprecomp::{
    build_bundle, is_separable, load_bundle, save_bundle, PrecompBundle, ZiPoly,
};
use cmlv_core::curvefam::{make_params, CurveParams};
use cmlv_core::gaussint::GaussInt;
use cmlv_core::mpcomplex::BigComplex;
use proptest::prelude::*;

pub fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cmlv-bundles")
}

pub fn params(d: i64) -> CurveParams {
    make_params(d).expect("valid curve parameter")
}

/// Loads (and re-verifies) the cached bundle for `d`, building it on a miss.
pub fn bundle(d: i64) -> Arc<PrecompBundle> {
    static MEMO: OnceLock<Mutex<HashMap<i64, Arc<PrecompBundle>>>> = OnceLock::new();
    let mut memo = MEMO
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    if let Some(b) = memo.get(&d) {
        return b.clone();
    }
    let path = cache_dir().join(format!("D{d}.bundle"));
    let b = match load_bundle(&path) {
        Ok(b) => b,
        Err(_) => {
            let b = build_bundle(&params(d)).expect("bundle builds");
            save_bundle(&b, &path).expect("bundle cache is writable");
            b
        }
    };
    let b = Arc::new(b);
    memo.insert(d, b.clone());
    b
}

/// Split primes `p ≤ hi` not dividing `2D`.
pub fn valid_primes(d: i64, hi: u64) -> Vec<u64> {
    cmlv_core::primes::split_primes(5, hi)
        .into_iter()
        .filter(|p| !(2 * d.unsigned_abs()).is_multiple_of(*p))
        .collect()
}

const ROOT_PREC: u32 = 320;

/// Roots of a monic polynomial by Durand–Kerner iteration.
pub fn numeric_roots(g: &ZiPoly) -> Vec<BigComplex> {
    let d = g.degree().expect("nonzero polynomial");
    let seed = BigComplex::from_f64(ROOT_PREC, 0.4, 0.9);
    let mut roots: Vec<BigComplex> = Vec::with_capacity(d);
    let mut z = BigComplex::from_f64(ROOT_PREC, 1.0, 0.0);
    for _ in 0..d {
        roots.push(z.clone());
        z = &z * &seed;
    }
    for _ in 0..4000 {
        let mut moved = false;
        for k in 0..d {
            let mut den = BigComplex::from_f64(ROOT_PREC, 1.0, 0.0);
            for (j, r) in roots.iter().enumerate() {
                if j != k {
                    den = &den * &(&roots[k] - r);
                }
            }
            let step = g.eval(&roots[k]).div(&den);
            if step.abs().to_f64() > 1e-80 {
                moved = true;
            }
            roots[k] = &roots[k] - &step;
        }
        if !moved {
            break;
        }
    }
    roots
}

/// `Σ rootᵐ` for `m < count`, each rounded to ℤ[i]; `None` if some sum is
/// not within `2^-32` of a Gaussian integer.
pub fn power_sums_from_roots(g: &ZiPoly, count: usize) -> Option<Vec<GaussInt>> {
    let roots = numeric_roots(g);
    let mut powers = vec![BigComplex::from_f64(ROOT_PREC, 1.0, 0.0); roots.len()];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut sum = BigComplex::zero(ROOT_PREC);
        for p in &powers {
            sum = &sum + p;
        }
        let (rounded, dist) = sum.round_to_gauss();
        if dist.to_f64() >= (-32f64).exp2() {
            return None;
        }
        out.push(rounded);
        for (p, r) in powers.iter_mut().zip(&roots) {
            *p = &*p * r;
        }
    }
    Some(out)
}

/// Separable monic polynomials of degree 1 to 8 with small Gaussian coefficients.
pub fn monic_poly() -> impl Strategy<Value = ZiPoly> {
    (1usize..=8)
        .prop_flat_map(|d| prop::collection::vec((-9i64..=9, -9i64..=9), d))
        .prop_map(|low| {
            let mut coeffs: Vec<GaussInt> =
                low.into_iter().map(|(a, b)| GaussInt::new(a, b)).collect();
            coeffs.push(GaussInt::one());
            ZiPoly::integral(coeffs)
        })
        .prop_filter("separable", is_separable)
}

/// One row of a digit table: `p` and the digits for `D = 17` and `D = −14`
/// (`None` where `p | 2D`).
pub struct TableRow {
    pub p: u64,
    pub d17: Option<u64>,
    pub dm14: Option<u64>,
}

pub fn parse_table(text: &str) -> Vec<TableRow> {
    let digit = |s: &str| {
        if s == "-" {
            None
        } else {
            Some(s.parse().expect("digit"))
        }
    };
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            TableRow {
                p: f[0].parse().expect("prime"),
                d17: digit(f[1]),
                dm14: digit(f[2]),
            }
        })
        .collect()
}

pub const DIGITS_SMALL: &str = include_str!("../../../../fixtures/digits-below-1000.txt");
pub const DIGITS_LARGE: &str = include_str!("../../../../fixtures/digits-11000-12000.txt");
pub const B13: &str = include_str!("../../../../fixtures/b13.txt");
