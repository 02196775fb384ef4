//! `c_p⁺(E)` modulo `p^k` through an embedding ℤ[i] → ℤ/p^k, the
//! production path for large `p`, together with valuations, table digits
//! and the resulting statements about `Sha(E/K)(p)`.

use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Integer;
use thiserror::Error;

use crate::algprecomp::PrecompBundle;
use crate::curvefam::CurveParams;
use crate::gaussint::GaussInt;
use crate::primes::{is_prime, split_primes};

/// Moduli must stay below 2⁹⁶ so that a residue times a 32-bit factor fits
/// in a `u128`.
pub const MAX_MODULUS_BITS: u32 = 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("p = {0} is not a prime ≡ 1 (mod 4)")]
    NotSplit(u64),
    #[error("p = {p} divides 2D (D = {d})")]
    BadReduction { p: u64, d: i64 },
    #[error("p = {0} is excluded (p ≥ 5 required)")]
    TooSmall(u64),
    #[error("precision exponent k must be at least 1")]
    ZeroPrecision,
    #[error("{p}^{k} exceeds the 2^96 modulus limit")]
    ModulusTooLarge { p: u64, k: u32 },
    #[error("bundle is for D = {bundle}, parameters are for D = {params}")]
    BundleMismatch { bundle: i64, params: i64 },
    #[error("{0} is not invertible modulo p^k")]
    NotInvertible(&'static str),
    #[error("the two embeddings disagree at p = {p}: {a} vs {b} mod p^{k}")]
    DualEmbeddingMismatch { p: u64, k: u32, a: u128, b: u128 },
}

/// `ℤ/p^k` together with a lifted square root of −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModCtx {
    pub p: u64,
    pub k: u32,
    pub modulus: u128,
    /// Lift of the smaller square root of −1 modulo `p`.
    pub r: u128,
    pub r_conj: u128,
}

impl ModCtx {
    /// The same ring with the other embedding `i ↦ −r`.
    pub fn conjugate(&self) -> ModCtx {
        ModCtx {
            r: self.r_conj,
            r_conj: self.r,
            ..*self
        }
    }

    pub fn mul(&self, a: u128, b: u128) -> u128 {
        mulmod(a, b, self.modulus)
    }

    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn pow(&self, mut a: u128, mut e: u64) -> u128 {
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inverse(&self, a: u128) -> Option<u128> {
        let inv = Integer::from(a).invert(&Integer::from(self.modulus)).ok()?;
        inv.to_u128()
    }

    pub fn reduce(&self, n: &Integer) -> u128 {
        let m = Integer::from(self.modulus);
        n.clone()
            .div_rem_euc(m)
            .1
            .to_u128()
            .expect("residue below modulus")
    }
}

/// `a·b mod m` for `a, b < m < 2⁹⁶`.
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if a.leading_zeros() + b.leading_zeros() >= 128 {
        return (a * b) % m;
    }
    // Horner over the 32-bit limbs of b; every intermediate stays below 2¹²⁸.
    let mut acc: u128 = 0;
    for shift in [64u32, 32, 0] {
        let limb = (b >> shift) & 0xffff_ffff;
        acc = ((acc << 32) % m + (a * limb) % m) % m;
    }
    acc
}

pub fn make_ctx(p: u64, k: u32, params: &CurveParams) -> Result<ModCtx, ScanError> {
    if k < 1 {
        return Err(ScanError::ZeroPrecision);
    }
    if p % 4 != 1 || !is_prime(p) {
        return Err(ScanError::NotSplit(p));
    }
    if (2 * params.d_param.unsigned_abs()).is_multiple_of(p) {
        return Err(ScanError::BadReduction {
            p,
            d: params.d_param,
        });
    }
    let pk = Integer::from(p).pow(k);
    if pk.significant_bits() > MAX_MODULUS_BITS {
        return Err(ScanError::ModulusTooLarge { p, k });
    }
    let r0 = {
        let r = crate::gaussint::sqrt_minus_one_mod(&Integer::from(p));
        let other = Integer::from(p) - &r;
        r.min(other)
    };
    // Newton: r ← r − (r² + 1)/(2r), valid mod p^k because 2r is a unit
    let mut r = r0;
    let mut prec = 1;
    while prec < k {
        prec = (2 * prec).min(k);
        let m = Integer::from(p).pow(prec);
        let f = Integer::from(r.square_ref()) + 1u32;
        let inv = Integer::from(&r * 2u32).invert(&m).expect("2r is a unit");
        r = (r - f * inv).div_rem_euc(m).1;
    }
    let modulus = pk.to_u128().expect("checked size");
    let r = r.to_u128().expect("residue");
    Ok(ModCtx {
        p,
        k,
        modulus,
        r,
        r_conj: (modulus - r) % modulus,
    })
}

/// `re + im·r (mod p^k)`.
pub fn embed(z: &GaussInt, ctx: &ModCtx) -> u128 {
    let re = ctx.reduce(&z.re);
    let im = ctx.reduce(&z.im);
    ctx.add(re, ctx.mul(im, ctx.r))
}

/// What can be said about `Sha(E/K)(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    ShaTrivialAtP,
    ShaFiniteAtP,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ShaTrivialAtP => "ShaTrivialAtP",
            Verdict::ShaFiniteAtP => "ShaFiniteAtP",
            Verdict::Inconclusive => "Inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        [
            Verdict::ShaTrivialAtP,
            Verdict::ShaFiniteAtP,
            Verdict::Inconclusive,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Finiteness needs `ord < g + 2` and the parity hypothesis; triviality
/// additionally needs `ord = g` at a good ordinary prime `p > 5`.
pub fn verdict(ord: u32, g: u32, p: u64, parity_ok: bool, good_ordinary_ok: bool) -> Verdict {
    if !parity_ok || ord >= g + 2 {
        return Verdict::Inconclusive;
    }
    if ord == g && good_ordinary_ok && p > 5 {
        Verdict::ShaTrivialAtP
    } else {
        Verdict::ShaFiniteAtP
    }
}

/// The `ord_p(c_p⁺)` column of a table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ord {
    Exact(u32),
    /// `c_p⁺ ≡ 0 (mod p^k)`: the valuation is at least `k`.
    AtLeast(u32),
}

impl Ord {
    pub fn lower_bound(self) -> u32 {
        match self {
            Ord::Exact(v) | Ord::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Ord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ord::Exact(v) => write!(f, "{v}"),
            Ord::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// The `c_p⁺·p⁻² mod p` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableDigit {
    Digit(u64),
    /// `ord < 2`, which the tables do not anticipate.
    Anomaly,
    /// Not enough `p`-adic digits to decide.
    Unknown,
}

impl fmt::Display for TableDigit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableDigit::Digit(d) => write!(f, "{d}"),
            TableDigit::Anomaly => f.write_str("anomaly"),
            TableDigit::Unknown => f.write_str("?"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpResult {
    pub p: u64,
    pub k: u32,
    /// `c_p⁺ mod p^k`.
    pub residue: u128,
    pub ord: Ord,
    /// `(c_p⁺·p^{−ord}) mod p`, when `ord < k`.
    pub unit_digit: Option<u64>,
    pub table_digit: TableDigit,
    pub exceptional: bool,
    pub verdict: Verdict,
    pub m_p_bound_note: String,
}

impl CpResult {
    /// The CSV header matching [`CpResult::csv_row`].
    pub const CSV_HEADER: &'static str = "p,ord,unit_digit,table_digit,exceptional,verdict";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.p,
            self.ord,
            self.unit_digit.map(|u| u.to_string()).unwrap_or_default(),
            self.table_digit,
            self.exceptional,
            self.verdict
        )
    }
}

/// Settings shared by every prime in a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanConfig {
    pub k: u32,
    /// Rank `g` of `E(ℚ)`.
    pub rank: u32,
    pub parity_ok: bool,
}

impl ScanConfig {
    /// `k = g + 3` detects every valuation up to the `g + 2` threshold.
    pub fn new(rank: u32) -> Self {
        ScanConfig {
            k: rank + 3,
            rank,
            parity_ok: false,
        }
    }
}

/// Coefficients of `B_n` modulo `p^k` (index = power of `X`), by the same
/// recurrence as the exact path: `B_{n+1}[m−1] = m·((4m−2)·b_{m−2} − (4m+2)·D·b_m)`.
pub fn bn_poly_mod(d_param: i64, n: usize, ctx: &ModCtx) -> Vec<u128> {
    let m = ctx.modulus;
    let d_abs = d_param.unsigned_abs() as u128 % m;
    let mut b = vec![0u128; n + 1];
    b[1] = 12 % m;
    let mut next = vec![0u128; n + 1];
    for cur in 1..n {
        next[..cur + 2].fill(0);
        for j in ((2 - cur % 2)..=cur + 2).step_by(2) {
            let jj = j as u128;
            let lo = if j >= 2 { b[j - 2] } else { 0 };
            let hi = if j <= cur { b[j] } else { 0 };
            let t1 = ctx.mul(lo, (4 * jj - 2) % m);
            let t2 = ctx.mul(ctx.mul(hi, (4 * jj + 2) % m), d_abs);
            let dj = if d_param > 0 {
                ctx.sub(t1, t2)
            } else {
                ctx.add(t1, t2)
            };
            next[j - 1] = ctx.mul(dj, jj % m);
        }
        std::mem::swap(&mut b, &mut next);
    }
    b
}

struct Embedded {
    g: Vec<u128>,
    j: Vec<u128>,
    s: Vec<u128>,
    j_denom: u128,
    f_alpha: u128,
}

fn embed_bundle(bundle: &PrecompBundle, ctx: &ModCtx) -> Embedded {
    Embedded {
        g: bundle.g.coeffs.iter().map(|c| embed(c, ctx)).collect(),
        j: bundle.j.coeffs.iter().map(|c| embed(c, ctx)).collect(),
        s: bundle.power_sums.iter().map(|c| embed(c, ctx)).collect(),
        j_denom: ctx.reduce(&bundle.j.denom),
        f_alpha: embed(&bundle.params.f_alpha, ctx),
    }
}

/// `c_p⁺ mod p^k` under the embedding of `ctx`, given `B_{(p−3)/2} mod p^k`.
fn cp_residue(bundle: &PrecompBundle, bn: &[u128], ctx: &ModCtx) -> Result<u128, ScanError> {
    let e = embed_bundle(bundle, ctx);
    let d = e.g.len() - 1;
    // A = B·J mod G
    let mut a = vec![0u128; bn.len() + e.j.len()];
    for (i, &bi) in bn.iter().enumerate() {
        if bi == 0 {
            continue;
        }
        for (jj, &cj) in e.j.iter().enumerate() {
            if cj != 0 {
                a[i + jj] = ctx.add(a[i + jj], ctx.mul(bi, cj));
            }
        }
    }
    for top in (d..a.len()).rev() {
        let t = a[top];
        if t == 0 {
            continue;
        }
        a[top] = 0;
        let shift = top - d;
        for (jj, &gj) in e.g[..d].iter().enumerate() {
            if gj != 0 {
                a[shift + jj] = ctx.sub(a[shift + jj], ctx.mul(t, gj));
            }
        }
    }
    let mut xi = 0u128;
    for (aj, sj) in a.iter().zip(&e.s) {
        xi = ctx.add(xi, ctx.mul(*aj, *sj));
    }
    let delta_inv = ctx
        .inverse(e.j_denom)
        .ok_or(ScanError::NotInvertible("denominator of J"))?;
    xi = ctx.mul(xi, delta_inv);

    let mut fact = 1 % ctx.modulus;
    for q in 2..ctx.p {
        fact = ctx.mul(fact, q as u128 % ctx.modulus);
    }
    let fact_inv = ctx
        .inverse(fact)
        .ok_or(ScanError::NotInvertible("(p-1)!"))?;
    let fa_inv = ctx
        .inverse(e.f_alpha)
        .ok_or(ScanError::NotInvertible("f·alpha"))?;
    let w_inv = ctx
        .inverse(bundle.params.w as u128)
        .ok_or(ScanError::NotInvertible("w"))?;
    let scale = ctx.mul(ctx.mul(ctx.pow(fa_inv, ctx.p), fact_inv), w_inv);
    Ok(ctx.neg(ctx.mul(xi, scale)))
}

fn ord_and_unit(residue: u128, ctx: &ModCtx) -> (Ord, Option<u128>) {
    if residue == 0 {
        return (Ord::AtLeast(ctx.k), None);
    }
    let p = ctx.p as u128;
    let mut v = 0;
    let mut r = residue;
    while r.is_multiple_of(p) {
        r /= p;
        v += 1;
    }
    (Ord::Exact(v), Some(r))
}

/// Both embeddings of `c_p⁺ mod p^k`, after checking they agree.
pub fn cp_residue_checked(
    params: &CurveParams,
    bundle: &PrecompBundle,
    p: u64,
    k: u32,
) -> Result<(ModCtx, u128), ScanError> {
    if bundle.params.d_param != params.d_param {
        return Err(ScanError::BundleMismatch {
            bundle: bundle.params.d_param,
            params: params.d_param,
        });
    }
    if p < 5 {
        return Err(ScanError::TooSmall(p));
    }
    let ctx = make_ctx(p, k, params)?;
    let bn = bn_poly_mod(params.d_param, ((p - 3) / 2) as usize, &ctx);
    let a = cp_residue(bundle, &bn, &ctx)?;
    let b = cp_residue(bundle, &bn, &ctx.conjugate())?;
    if a != b {
        return Err(ScanError::DualEmbeddingMismatch { p, k, a, b });
    }
    Ok((ctx, a))
}

pub fn cp_plus_mod(
    params: &CurveParams,
    bundle: &PrecompBundle,
    p: u64,
    cfg: &ScanConfig,
) -> Result<CpResult, ScanError> {
    let (ctx, residue) = cp_residue_checked(params, bundle, p, cfg.k)?;
    let (ord, unit) = ord_and_unit(residue, &ctx);
    let pp = p as u128;
    let unit_digit = unit.map(|u| (u % pp) as u64);
    let table_digit = match ord {
        Ord::Exact(v) if v < 2 => TableDigit::Anomaly,
        Ord::Exact(2) if cfg.k >= 3 => TableDigit::Digit(unit_digit.expect("ord < k")),
        Ord::Exact(2) => TableDigit::Unknown,
        _ if cfg.k >= 3 => TableDigit::Digit(0),
        _ => TableDigit::Unknown,
    };
    let low = ord.lower_bound();
    let exceptional = low > cfg.rank;
    let v = match ord {
        Ord::Exact(v) => verdict(v, cfg.rank, p, cfg.parity_ok, p > 5),
        // only a lower bound is known
        Ord::AtLeast(_) => Verdict::Inconclusive,
    };
    let m_p_bound_note = format!("s_P <= {ord} and s_P* <= {ord} (P, P* above {p})");
    Ok(CpResult {
        p,
        k: cfg.k,
        residue,
        ord,
        unit_digit,
        table_digit,
        exceptional,
        verdict: v,
        m_p_bound_note,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub results: Vec<CpResult>,
    /// Split primes in range that were not computed, with the reason.
    pub skipped: Vec<(u64, String)>,
}

/// Every prime `p ≡ 1 (mod 4)` with `p_min ≤ p ≤ p_max`, ascending.
pub fn scan(
    params: &CurveParams,
    bundle: &PrecompBundle,
    p_min: u64,
    p_max: u64,
    cfg: &ScanConfig,
) -> Result<ScanReport, ScanError> {
    let primes: Vec<u64> = split_primes(p_min.max(5), p_max);
    let (valid, skipped): (Vec<u64>, Vec<u64>) = primes
        .into_iter()
        .partition(|&p| !(2 * params.d_param.unsigned_abs()).is_multiple_of(p));
    let results: Result<Vec<CpResult>, ScanError> = valid
        .par_iter()
        .map(|&p| cp_plus_mod(params, bundle, p, cfg))
        .collect();
    Ok(ScanReport {
        results: results?,
        skipped: skipped
            .into_iter()
            .map(|p| {
                (
                    p,
                    format!("not valid: p divides 2D = {}", 2 * params.d_param),
                )
            })
            .collect(),
    })
}

/// Parse rows written by [`CpResult::csv_row`] back into
/// `(p, ord, unit_digit, table_digit, exceptional, verdict)`.
pub fn parse_csv_row(line: &str) -> Option<(u64, Ord, Option<u64>, TableDigit, bool, Verdict)> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 6 {
        return None;
    }
    let p = f[0].parse().ok()?;
    let ord = match f[1].strip_prefix(">=") {
        Some(v) => Ord::AtLeast(v.parse().ok()?),
        None => Ord::Exact(f[1].parse().ok()?),
    };
    let unit = if f[2].is_empty() {
        None
    } else {
        Some(f[2].parse().ok()?)
    };
    let td = match f[3] {
        "anomaly" => TableDigit::Anomaly,
        "?" => TableDigit::Unknown,
        d => TableDigit::Digit(d.parse().ok()?),
    };
    Some((p, ord, unit, td, f[4].parse().ok()?, Verdict::parse(f[5])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvefam::make_params;
    use crate::traceexact::bn_poly_exact;

    #[test]
    fn contexts() {
        let params = make_params(17).unwrap();
        assert_eq!(make_ctx(5, 1, &params).unwrap().r, 2);
        assert_eq!(make_ctx(5, 2, &params).unwrap().r, 7);
        assert_eq!(make_ctx(13, 1, &params).unwrap().r, 5);
        let c = make_ctx(277, 4, &params).unwrap();
        assert_eq!(c.mul(c.r, c.r), c.modulus - 1);
        assert!(make_ctx(7, 2, &params).is_err());
        assert!(make_ctx(17, 2, &params).is_err());
        assert!(make_ctx(13, 0, &params).is_err());
        assert_eq!(embed(&GaussInt::i(), &c), c.r);
    }

    #[test]
    fn mulmod_large() {
        let m: u128 = (1u128 << 95) + 12345;
        let a = m - 3;
        let b = m - 7;
        assert_eq!(mulmod(a, b, m), 21);
        let x = Integer::from(0xdead_beef_1234_5678_9abc_u128) * 0x1_0000_0001_u64;
        let y = (m - 1) / 3;
        let want = (x.clone() * y) % m;
        assert_eq!(
            mulmod(x.to_u128().unwrap() % m, y, m),
            want.to_u128().unwrap()
        );
    }

    #[test]
    fn bn_mod_matches_exact() {
        for d in [17i64, -14, 3] {
            let params = make_params(d).unwrap();
            let ctx = make_ctx(13, 5, &params).unwrap();
            for n in 1..25 {
                let exact = bn_poly_exact(d, n);
                let modular = bn_poly_mod(d, n, &ctx);
                let reduced: Vec<u128> = exact.coeffs.iter().map(|c| ctx.reduce(c)).collect();
                assert_eq!(modular, reduced, "D = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn verdict_table() {
        assert_eq!(verdict(2, 2, 13, true, true), Verdict::ShaTrivialAtP);
        assert_eq!(verdict(3, 2, 29, true, true), Verdict::ShaFiniteAtP);
        assert_eq!(verdict(4, 2, 29, true, true), Verdict::Inconclusive);
        assert_eq!(verdict(2, 2, 13, false, true), Verdict::Inconclusive);
        assert_eq!(verdict(2, 2, 5, true, true), Verdict::ShaFiniteAtP);
    }
}
