//! Exact reference computation of `c_p⁺(E)` over ℤ[i][1/f]: Newton power
//! sums, the `B_n` recurrence for odd derivatives of ℘, and the final
//! contraction. Used for small `p` and as ground truth for the modular scan.

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::algprecomp::{PrecompBundle, ZiPoly};
use crate::curvefam::CurveParams;
use crate::gaussint::GaussInt;
use crate::primes::is_prime;

/// Largest prime handled by [`cp_plus_exact`]; beyond it use the modular scan.
pub const EXACT_P_MAX: u64 = 101;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("polynomial must be monic with integral coefficients")]
    NotMonic,
    #[error("p = {p} is not a prime ≡ 1 (mod 4) with p ≥ 5 and p ∤ 2D (D = {d})")]
    BadPrime { p: u64, d: i64 },
    #[error("p = {p} exceeds the exact-path bound {max}")]
    PrimeTooLarge { p: u64, max: u64 },
    #[error("bundle is for D = {bundle}, parameters are for D = {params}")]
    BundleMismatch { bundle: i64, params: i64 },
    #[error("c_p⁺ for p = {0} has nonzero imaginary part")]
    NotRational(u64),
}

/// `s_0 … s_{count−1}` with `s_m = Σ u^m` over the roots of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSums {
    pub values: Vec<GaussInt>,
}

/// Newton's identities for a monic integral `G = Σ c_j Xʲ` of degree `d`:
/// `s_m = −m·c_{d−m} − Σ_{k=1}^{m−1} c_{d−k} s_{m−k}` for `m ≤ d`, and
/// `s_m = −Σ_{k=1}^{d} c_{d−k} s_{m−k}` beyond.
pub fn newton_power_sums(g: &ZiPoly, count: usize) -> Result<PowerSums, TraceError> {
    if !g.is_monic() || g.degree() == Some(0) {
        return Err(TraceError::NotMonic);
    }
    let d = g.degree().ok_or(TraceError::NotMonic)?;
    let c = |j: usize| &g.coeffs[j];
    let mut s: Vec<GaussInt> = Vec::with_capacity(count);
    if count > 0 {
        s.push(GaussInt::from_int(d as i64));
    }
    for m in 1..count {
        let mut acc = if m <= d {
            -c(d - m).mul_int(&Integer::from(m))
        } else {
            GaussInt::zero()
        };
        for k in 1..=(m - 1).min(d) {
            let ck = c(d - k);
            if !ck.is_zero() {
                acc -= &(ck * &s[m - k]);
            }
        }
        s.push(acc);
    }
    Ok(PowerSums { values: s })
}

/// `B_n(X)` with `℘^{(2n+1)} = B_n(℘)·℘′` on a lattice with `g₂ = 4D`, `g₃ = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnPoly {
    pub n: usize,
    /// Index = power of `X`; length `n + 1`.
    pub coeffs: Vec<Integer>,
}

impl BnPoly {
    pub fn first() -> BnPoly {
        BnPoly {
            n: 1,
            coeffs: vec![Integer::new(), Integer::from(12)],
        }
    }

    /// `B_{n+1}` from `B_n`. Writing `D_{n+1} = B_n′·(4X³ − 4DX) + B_n·(6X² − 2D)`,
    /// its `X^m` coefficient is `(4m − 2)·b_{m−2} − (4m + 2)·D·b_m`, and
    /// `B_{n+1} = D_{n+1}′`.
    pub fn next(&self, d_param: i64) -> BnPoly {
        let b = &self.coeffs;
        let n = self.n;
        let get = |j: isize| -> Option<&Integer> {
            if j < 0 {
                None
            } else {
                b.get(j as usize)
            }
        };
        let mut out = vec![Integer::new(); n + 2];
        // D_{n+1} has degree n + 2 and the parity of n; so B_{n+1} has parity n + 1.
        for m in ((n % 2)..=n + 2).step_by(2) {
            if m == 0 {
                continue;
            }
            let mut dm = Integer::new();
            if let Some(x) = get(m as isize - 2) {
                dm += Integer::from(x * (4 * m as i64 - 2));
            }
            if let Some(x) = get(m as isize) {
                dm -= Integer::from(x * (d_param * (4 * m as i64 + 2)));
            }
            out[m - 1] = dm * (m as u64);
        }
        let next = BnPoly {
            n: n + 1,
            coeffs: out,
        };
        assert!(next.has_parity(), "B_{} violates the parity law", n + 1);
        // lead(B_{n+1}) = (n+2)(2n+3)(2n+2)/(n+1)·lead(B_n) = 2(n+2)(2n+3)·lead(B_n)
        assert_eq!(
            next.coeffs[n + 1],
            Integer::from(&self.coeffs[n] * (2 * (n as u64 + 2) * (2 * n as u64 + 3))),
            "leading-coefficient law"
        );
        next
    }

    /// Only exponents `≡ n (mod 2)` carry nonzero coefficients.
    pub fn has_parity(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(j, c)| (j + self.n).is_multiple_of(2) || *c == 0)
    }

    pub fn leading(&self) -> &Integer {
        &self.coeffs[self.n]
    }
}

/// `(n + 1)·(2n + 1)!`, the leading coefficient of every `B_n`.
pub fn bn_leading_coefficient(n: usize) -> Integer {
    Integer::from(Integer::factorial(2 * n as u32 + 1)) * (n as u64 + 1)
}

pub fn bn_poly_exact(d_param: i64, n: usize) -> BnPoly {
    assert!(n >= 1, "B_n is defined for n ≥ 1");
    let mut b = BnPoly::first();
    while b.n < n {
        b = b.next(d_param);
    }
    b
}

/// A `B_n` polynomial written as `a·2^e · Σ c_j X^j`, expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnFixture {
    pub d_param: i64,
    /// Full coefficients, index = power of `X`; `n` is the top index.
    pub coeffs: Vec<Integer>,
}

/// Reads blocks of the form
///
/// ```text
/// D 17
/// factor 7496723869173 24
/// 1 1383348216959
/// 3 -10236515835780
/// ```
///
/// where `factor a e` (optional) multiplies the coefficients listed after it
/// by `a·2^e`. Blank lines and `#` comments are ignored.
pub fn parse_bn_fixtures(text: &str) -> Result<Vec<BnFixture>, String> {
    let mut blocks: Vec<(BnFixture, Integer)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || format!("fixture line {}: {line:?}", n + 1);
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            ["D", d] => {
                let d_param = d.parse().map_err(|_| bad())?;
                let fx = BnFixture {
                    d_param,
                    coeffs: Vec::new(),
                };
                blocks.push((fx, Integer::from(1)));
            }
            ["factor", a, e] => {
                let a: Integer = a.parse().map_err(|_| bad())?;
                let e: u32 = e.parse().map_err(|_| bad())?;
                blocks.last_mut().ok_or_else(bad)?.1 = a << e;
            }
            [deg, c] => {
                let deg: usize = deg.parse().map_err(|_| bad())?;
                let c: Integer = c.parse().map_err(|_| bad())?;
                let (fx, scale) = blocks.last_mut().ok_or_else(bad)?;
                if fx.coeffs.len() <= deg {
                    fx.coeffs.resize(deg + 1, Integer::new());
                }
                fx.coeffs[deg] = c * &*scale;
            }
            _ => return Err(bad()),
        }
    }
    blocks
        .into_iter()
        .map(|(fx, _)| {
            if fx.coeffs.is_empty() {
                Err(format!("D = {}: no coefficients", fx.d_param))
            } else {
                Ok(fx)
            }
        })
        .collect()
}

/// Checks the preconditions shared by the exact and modular paths.
pub fn check_prime(params: &CurveParams, p: u64) -> Result<(), TraceError> {
    let bad = p < 5
        || p % 4 != 1
        || !is_prime(p)
        || (2 * params.d_param.unsigned_abs()).is_multiple_of(p);
    if bad {
        Err(TraceError::BadPrime {
            p,
            d: params.d_param,
        })
    } else {
        Ok(())
    }
}

/// `Ξ_p = Trace(B_{(p−3)/2}(u)·J(u))` as `(numerator, denominator)`.
pub fn xi_p_exact(bundle: &PrecompBundle, p: u64) -> (GaussInt, Integer) {
    let n = ((p - 3) / 2) as usize;
    let bn = bn_poly_exact(bundle.params.d_param, n);
    let a = ZiPoly::from_integers(&bn.coeffs)
        .mul(&ZiPoly::integral(bundle.j.coeffs.clone()))
        .rem_monic(&bundle.g);
    let mut xi = GaussInt::zero();
    for (aj, sj) in a.coeffs.iter().zip(&bundle.power_sums) {
        if !aj.is_zero() {
            xi += &(aj * sj);
        }
    }
    (xi, bundle.j.denom.clone())
}

/// `c_p⁺ = −w⁻¹·(fα)^{−p}·((p−1)!)⁻¹·Ξ_p` exactly, for `p ≤ EXACT_P_MAX`.
pub fn cp_plus_exact(
    params: &CurveParams,
    bundle: &PrecompBundle,
    p: u64,
) -> Result<Rational, TraceError> {
    if p > EXACT_P_MAX {
        return Err(TraceError::PrimeTooLarge {
            p,
            max: EXACT_P_MAX,
        });
    }
    cp_plus_exact_unbounded(params, bundle, p)
}

/// [`cp_plus_exact`] without the size guard.
pub fn cp_plus_exact_unbounded(
    params: &CurveParams,
    bundle: &PrecompBundle,
    p: u64,
) -> Result<Rational, TraceError> {
    if bundle.params.d_param != params.d_param {
        return Err(TraceError::BundleMismatch {
            bundle: bundle.params.d_param,
            params: params.d_param,
        });
    }
    check_prime(params, p)?;
    let (xi, delta) = xi_p_exact(bundle, p);
    cp_from_xi(params, p, &xi, &delta)
}

/// Applies `c_p⁺ = −w⁻¹·(fα)^{−p}·((p−1)!)⁻¹·Ξ_p` to `Ξ_p = xi/denom`.
pub fn cp_from_xi(
    params: &CurveParams,
    p: u64,
    xi: &GaussInt,
    denom: &Integer,
) -> Result<Rational, TraceError> {
    // 1/(fα)^p = conj(fα)^p / N(fα)^p
    let p32 = u32::try_from(p).expect("p fits in u32");
    let num = -(&params.f_alpha.conj().pow(p32) * xi);
    if num.im != 0 {
        return Err(TraceError::NotRational(p));
    }
    let den = params.f_alpha.norm().pow(p32)
        * Integer::from(Integer::factorial(p32 - 1))
        * params.w
        * denom;
    Ok(Rational::from((num.re, den)))
}

/// `ord_p` of a nonzero rational; `None` for zero.
pub fn rational_ord(c: &Rational, p: u64) -> Option<i64> {
    if *c.numer() == 0 {
        return None;
    }
    let p = Integer::from(p);
    let v = |n: &Integer| -> i64 {
        let mut n = n.clone();
        let mut e = 0;
        while n.is_divisible(&p) {
            n.div_exact_mut(&p);
            e += 1;
        }
        e
    };
    Some(v(c.numer()) - v(c.denom()))
}

/// `(c·p^{−e}) mod p` for a rational `c` with `ord_p(c) ≥ e`, in `[0, p)`.
pub fn rational_digit(c: &Rational, p: u64, e: i64) -> Option<u64> {
    rational_residue(c, p, e, 1)
}

/// `(c·p^{−e}) mod p^k` for `ord_p(c) ≥ e`.
pub fn rational_residue(c: &Rational, p: u64, e: i64, k: u32) -> Option<u64> {
    let pi = Integer::from(p);
    let mut num = c.numer().clone();
    let mut den = c.denom().clone();
    if e >= 0 {
        den *= Integer::from(Pow::pow(&pi, e as u32));
    } else {
        num *= Integer::from(Pow::pow(&pi, (-e) as u32));
    }
    let r = Rational::from((num, den));
    if r.denom().is_divisible(&pi) {
        return None;
    }
    let m = Integer::from(Pow::pow(&pi, k));
    let inv = r.denom().clone().invert(&m).ok()?;
    let v = (Integer::from(r.numer() * &inv)).div_rem_euc(m).1;
    v.to_u64()
}
