//! Arbitrary-precision complex arithmetic and the Weierstrass ℘-function of
//! the square lattice ℤ[i].
//!
//! ℘ is evaluated by reducing the argument into the fundamental square,
//! halving it into a small disk, summing the Laurent series there and
//! doubling back up with the duplication formula. The lattice is fixed:
//! `g₂(ℤ[i]) = 4Ω⁴`, `g₃ = 0`, with `Ω` the lemniscate constant.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::AssignRound;
use rug::{Assign, Float, Integer};
use thiserror::Error;

use crate::gaussint::GaussInt;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WpError {
    #[error("argument is a lattice point (pole of ℘)")]
    Pole,
    #[error("precision unattainable: {0}")]
    Precision(String),
}

#[derive(Clone)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        BigComplex {
            re,
            im: Float::new(prec),
        }
    }

    pub fn from_gauss(prec: u32, z: &GaussInt) -> Self {
        BigComplex {
            re: Float::with_val(prec, &z.re),
            im: Float::with_val(prec, &z.im),
        }
    }

    /// `num / den` for a Gaussian integer numerator and positive denominator.
    pub fn from_gauss_ratio(prec: u32, num: &GaussInt, den: &Integer) -> Self {
        let mut re = Float::with_val(prec + 8, &num.re);
        re /= den;
        let mut im = Float::with_val(prec + 8, &num.im);
        im /= den;
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        BigComplex {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let prec = self.prec();
        let mut n = Float::with_val(prec, self.re.square_ref());
        n += Float::with_val(prec, self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn sqr(&self) -> Self {
        let prec = self.prec();
        let re = Float::with_val(prec, self.re.square_ref())
            - Float::with_val(prec, self.im.square_ref());
        let mut im = Float::with_val(prec, &self.re * &self.im);
        im <<= 1;
        BigComplex { re, im }
    }

    pub fn mul_real(&self, x: &Float) -> Self {
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(prec, &self.re * x),
            im: Float::with_val(prec, &self.im * x),
        }
    }

    pub fn mul_i64(&self, x: i64) -> Self {
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(prec, &self.re * x),
            im: Float::with_val(prec, &self.im * x),
        }
    }

    /// Multiply by `2^k` (exact).
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mut out = self.clone();
        if k >= 0 {
            out.re <<= k as u32;
            out.im <<= k as u32;
        } else {
            out.re >>= (-k) as u32;
            out.im >>= (-k) as u32;
        }
        out
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(prec, &self.re / &n),
            im: Float::with_val(prec, -Float::with_val(prec, &self.im / &n)),
        }
    }

    pub fn div(&self, other: &BigComplex) -> Self {
        self * &other.recip()
    }

    /// Nearest Gaussian integer and the distance (max over components) to it.
    pub fn round_to_gauss(&self) -> (GaussInt, Float) {
        let prec = self.prec();
        let re = Float::with_val(prec, self.re.round_ref());
        let im = Float::with_val(prec, self.im.round_ref());
        let dre = Float::with_val(prec, &self.re - &re).abs();
        let dim = Float::with_val(prec, &self.im - &im).abs();
        let dist = if dre > dim { dre } else { dim };
        let z = GaussInt::new(
            re.to_integer().expect("finite real part"),
            im.to_integer().expect("finite imaginary part"),
        );
        (z, dist)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} + {:e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let prec = self.prec().max(rhs.prec());
        BigComplex {
            re: Float::with_val(prec, &self.re + &rhs.re),
            im: Float::with_val(prec, &self.im + &rhs.im),
        }
    }
}

impl Sub<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let prec = self.prec().max(rhs.prec());
        BigComplex {
            re: Float::with_val(prec, &self.re - &rhs.re),
            im: Float::with_val(prec, &self.im - &rhs.im),
        }
    }
}

impl Mul<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let prec = self.prec().max(rhs.prec());
        let ac = Float::with_val(prec, &self.re * &rhs.re);
        let bd = Float::with_val(prec, &self.im * &rhs.im);
        let ad = Float::with_val(prec, &self.re * &rhs.im);
        let bc = Float::with_val(prec, &self.im * &rhs.re);
        BigComplex {
            re: ac - bd,
            im: ad + bc,
        }
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

/// Working-precision parameters for ℘ evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionCtx {
    pub prec_bits: u32,
    /// Nonzero Laurent terms summed per evaluation.
    pub series_terms: usize,
    /// Extra halvings applied after the argument already lies in the
    /// `|z| <= HALVING_RADIUS` disk; each one trades series terms for a
    /// cheap duplication step.
    pub halving_depth: u32,
}

/// Arguments are halved until `|z|` is at most this radius (the nearest
/// pole is at distance 1).
pub const HALVING_RADIUS: f64 = 0.35;

/// Guard bits added per possible halving level.
const GUARD_PER_LEVEL: u32 = 32;

impl PrecisionCtx {
    pub fn new(prec_bits: u32) -> Self {
        Self::with_halving_depth(prec_bits, 2)
    }

    pub fn with_halving_depth(prec_bits: u32, halving_depth: u32) -> Self {
        let prec_bits = prec_bits.max(64);
        let mut ctx = PrecisionCtx {
            prec_bits,
            series_terms: 0,
            halving_depth,
        };
        let radius = HALVING_RADIUS / f64::powi(2.0, halving_depth as i32);
        let bits_per_term = 4.0 * (1.0 / radius).log2();
        ctx.series_terms = ((ctx.work_prec() as f64 + 32.0) / bits_per_term).ceil() as usize + 4;
        ctx
    }

    /// Internal precision: target plus guard bits for every level of
    /// halving (two to enter the disk from the square's corner, plus
    /// `halving_depth`).
    pub fn work_prec(&self) -> u32 {
        self.prec_bits + GUARD_PER_LEVEL * (self.halving_depth + 3)
    }
}

/// `Ω = π / M(1, √2)` together with the number of AGM iterations used.
pub fn lemniscate_period_with_iterations(prec_bits: u32) -> (Float, u32) {
    let prec = prec_bits + 16;
    let mut a = Float::with_val(prec, 1);
    let mut b = Float::with_val(prec, 2).sqrt();
    let mut iters = 0;
    loop {
        let diff = Float::with_val(prec, &a - &b).abs();
        let mut tol = a.clone();
        tol >>= prec_bits + 8;
        if diff <= tol {
            break;
        }
        let next_a = Float::with_val(prec, &a + &b) / 2u32;
        let next_b = Float::with_val(prec, &a * &b).sqrt();
        a = next_a;
        b = next_b;
        iters += 1;
    }
    let pi = Float::with_val(prec, Constant::Pi);
    let mut omega = Float::new(prec_bits);
    omega.assign_round(pi / a, Round::Nearest);
    (omega, iters)
}

/// The least positive real period `Ω = 2.622057…` of `y² = x³ − x`.
pub fn lemniscate_period(ctx: &PrecisionCtx) -> Float {
    lemniscate_period_with_iterations(ctx.prec_bits).0
}

/// Splits `z = z0 + shift` with `z0` in the half-open unit square
/// `[−1/2, 1/2)²` and `shift ∈ ℤ[i]`.
pub fn reduce_to_fundamental(z: &BigComplex) -> (BigComplex, GaussInt) {
    let prec = z.prec();
    let shift_part = |x: &Float| -> Integer {
        let mut t = Float::with_val(prec + 2, x);
        t += 0.5;
        t.floor().to_integer().expect("finite")
    };
    let shift = GaussInt::new(shift_part(&z.re), shift_part(&z.im));
    let z0 = BigComplex {
        re: Float::with_val(prec, &z.re - &shift.re),
        im: Float::with_val(prec, &z.im - &shift.im),
    };
    (z0, shift)
}

/// Exact version of [`reduce_to_fundamental`] for `num / den`: returns the
/// reduced numerator (over the same denominator) and the shift.
pub fn reduce_ratio_to_fundamental(num: &GaussInt, den: &Integer) -> (GaussInt, GaussInt) {
    let two_den = Integer::from(den * 2);
    let part = |x: &Integer| -> Integer {
        let t = Integer::from(x * 2) + den;
        t.div_rem_floor(two_den.clone()).0
    };
    let shift = GaussInt::new(part(&num.re), part(&num.im));
    let reduced = num - &shift.mul_int(den);
    (reduced, shift)
}

/// ℘ and ℘′ of the lattice ℤ[i] at a fixed precision, with cached Laurent
/// coefficients.
#[derive(Clone)]
pub struct WpEvaluator {
    ctx: PrecisionCtx,
    omega: Float,
    g2: Float,
    /// `coeffs[j-1]` is the coefficient of `z^(4j−2)` in `℘(z) − z⁻²`.
    coeffs: Vec<Float>,
}

impl WpEvaluator {
    pub fn new(ctx: PrecisionCtx) -> Self {
        let prec = ctx.work_prec();
        let omega = lemniscate_period_with_iterations(prec).0;
        let mut g2 = Float::with_val(prec, omega.square_ref());
        g2.square_mut();
        g2 *= 4u32;
        let coeffs = laurent_coefficients(&g2, ctx.series_terms);
        WpEvaluator {
            ctx,
            omega,
            g2,
            coeffs,
        }
    }

    pub fn ctx(&self) -> &PrecisionCtx {
        &self.ctx
    }

    /// `Ω` at working precision.
    pub fn omega(&self) -> &Float {
        &self.omega
    }

    /// `g₂(ℤ[i]) = 4Ω⁴` at working precision.
    pub fn g2(&self) -> &Float {
        &self.g2
    }

    pub fn wp(&self, z: &BigComplex) -> Result<BigComplex, WpError> {
        self.wp_pair(z).map(|(x, _)| x)
    }

    pub fn wp_prime(&self, z: &BigComplex) -> Result<BigComplex, WpError> {
        self.wp_pair(z).map(|(_, y)| y)
    }

    /// `(℘(z), ℘′(z))` rounded to `ctx.prec_bits`.
    pub fn wp_pair(&self, z: &BigComplex) -> Result<(BigComplex, BigComplex), WpError> {
        let (x, y) = self.wp_pair_work(z)?;
        let p = self.ctx.prec_bits;
        Ok((x.with_prec(p), y.with_prec(p)))
    }

    /// `(℘(z), ℘′(z))` left at working precision.
    pub fn wp_pair_work(&self, z: &BigComplex) -> Result<(BigComplex, BigComplex), WpError> {
        let prec = self.ctx.work_prec();
        let (z0, _) = reduce_to_fundamental(&z.with_prec(prec));
        if z0.is_zero() {
            return Err(WpError::Pole);
        }
        let r = z0.abs().to_f64();
        if r < f64::powi(2.0, -((self.ctx.prec_bits / 8) as i32)) {
            return Err(WpError::Precision(format!(
                "argument {r:e} too close to a lattice point"
            )));
        }
        let mut halvings = self.ctx.halving_depth;
        let mut rr = r;
        while rr > HALVING_RADIUS {
            rr /= 2.0;
            halvings += 1;
        }
        if halvings > self.ctx.halving_depth + 3 {
            return Err(WpError::Precision(format!(
                "argument needs {halvings} halvings; guard bits cover {}",
                self.ctx.halving_depth + 3
            )));
        }
        let w = z0.mul_pow2(-(halvings as i32));
        let (mut x, mut y) = self.series(&w);
        for _ in 0..halvings {
            (x, y) = self.double(&x, &y);
        }
        Ok((x, y))
    }

    fn series(&self, w: &BigComplex) -> (BigComplex, BigComplex) {
        let prec = self.ctx.work_prec();
        let w2 = w.sqr();
        let t = w2.sqr();
        let mut s = BigComplex::zero(prec);
        let mut sp = BigComplex::zero(prec);
        for (idx, c) in self.coeffs.iter().enumerate().rev() {
            let j = idx as i64 + 1;
            s = &s * &t;
            s.re += c;
            sp = &sp * &t;
            let mut cj = Float::with_val(prec, c);
            cj *= 4 * j - 2;
            sp.re += &cj;
        }
        let inv_w2 = w2.recip();
        let x = &inv_w2 + &(&w2 * &s);
        let inv_w3 = (&w2 * w).recip();
        let y = &inv_w3.mul_i64(-2) + &(w * &sp);
        (x, y)
    }

    /// Duplication on `Y² = 4X³ − g₂X`: returns `(℘(2z), ℘′(2z))`.
    fn double(&self, x: &BigComplex, y: &BigComplex) -> (BigComplex, BigComplex) {
        let mut num = x.sqr().mul_i64(12);
        num.re -= &self.g2;
        let lambda = num.div(&y.mul_i64(2));
        let x2 = &lambda.sqr().mul_pow2(-2) - &x.mul_i64(2);
        let y2 = -(&(&lambda * &(&x2 - x)) + y);
        (x2, y2)
    }
}

/// Laurent coefficients of ℘ for `g₃ = 0`: `c₂ = g₂/20` and
/// `c_k = 3/((2k+1)(k−3)) Σ_{m=2}^{k−2} c_m c_{k−m}`; only even `k` survive,
/// so `out[j-1] = c_{2j}`.
fn laurent_coefficients(g2: &Float, terms: usize) -> Vec<Float> {
    let prec = g2.prec();
    let mut c: Vec<Float> = Vec::with_capacity(terms);
    if terms == 0 {
        return c;
    }
    c.push(Float::with_val(prec, g2 / 20u32));
    let mut acc = Float::new(prec);
    for j in 2..=terms {
        acc.assign(0);
        // Σ_{i=1}^{j−1} c_{2i} c_{2(j−i)}, folded by symmetry
        for i in 1..=(j - 1) / 2 {
            acc += Float::with_val(prec, &c[i - 1] * &c[j - i - 1]);
        }
        acc <<= 1;
        if j % 2 == 0 {
            let h = j / 2;
            acc += Float::with_val(prec, c[h - 1].square_ref());
        }
        let k = 2 * j as u64;
        let denom = (2 * k + 1) * (k - 3);
        let mut next = Float::with_val(prec, &acc * 3u32);
        next /= denom;
        c.push(next);
    }
    c
}

/// ℘(z) on ℤ[i]. Builds a fresh evaluator; use [`WpEvaluator`] for many
/// points at one precision.
pub fn wp(z: &BigComplex, ctx: &PrecisionCtx) -> Result<BigComplex, WpError> {
    WpEvaluator::new(*ctx).wp(z)
}

pub fn wp_prime(z: &BigComplex, ctx: &PrecisionCtx) -> Result<BigComplex, WpError> {
    WpEvaluator::new(*ctx).wp_prime(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &BigComplex, b: &BigComplex, rel_bits: u32) -> bool {
        let diff = (a - b).abs();
        let scale = a.abs().max(&Float::with_val(a.prec(), 1)).clone();
        let mut tol = scale;
        tol >>= rel_bits;
        diff <= tol
    }

    #[test]
    fn lemniscate_constant_digits() {
        let ctx = PrecisionCtx::new(64);
        let omega = lemniscate_period(&ctx);
        assert!((omega.to_f64() - 2.622_057_554_292_119_8).abs() < 1e-15);
    }

    #[test]
    fn lemniscate_converges_under_doubling() {
        for prec in [64u32, 128, 512, 2048] {
            let (a, it) = lemniscate_period_with_iterations(prec);
            let (b, _) = lemniscate_period_with_iterations(2 * prec);
            let mut tol = Float::with_val(2 * prec, &b);
            tol >>= prec - 2;
            assert!(Float::with_val(2 * prec, &a - &b).abs() <= tol);
            let bound = (prec as f64).log2().ceil() as u32 + 4;
            assert!(it <= bound, "{it} iterations at {prec} bits");
        }
    }

    #[test]
    fn reduction_examples() {
        let z = BigComplex::from_f64(64, 0.3, 0.2);
        let (z0, s) = reduce_to_fundamental(&z);
        assert_eq!(s, GaussInt::zero());
        assert!(close(&z0, &z, 60));

        let z = BigComplex::from_f64(64, 1.6, -0.7);
        let (z0, s) = reduce_to_fundamental(&z);
        assert_eq!(s, GaussInt::new(2, -1));
        assert!(close(&z0, &BigComplex::from_f64(64, -0.4, 0.3), 50));

        let g = GaussInt::new(-3, 5);
        let zg = &z + &BigComplex::from_gauss(64, &g);
        let (z1, _) = reduce_to_fundamental(&zg);
        assert!(close(&z1, &z0, 50));

        let (num, shift) = reduce_ratio_to_fundamental(&GaussInt::new(16, -7), &Integer::from(10));
        assert_eq!(shift, GaussInt::new(2, -1));
        assert_eq!(num, GaussInt::new(-4, 3));
    }

    #[test]
    fn pole_is_rejected() {
        let ev = WpEvaluator::new(PrecisionCtx::new(128));
        let z = BigComplex::from_f64(128, 2.0, -1.0);
        assert_eq!(ev.wp(&z).unwrap_err(), WpError::Pole);
    }

    #[test]
    fn symmetries_and_differential_equation() {
        let ctx = PrecisionCtx::new(256);
        let ev = WpEvaluator::new(ctx);
        let samples = [
            (0.31, 0.17),
            (-0.45, 0.49),
            (0.02, -0.013),
            (0.5, 0.0),
            (0.123, 0.456),
        ];
        for &(a, b) in &samples {
            let z = BigComplex::from_f64(300, a, b);
            let (x, y) = ev.wp_pair(&z).unwrap();
            // evenness
            let xm = ev.wp(&(-z.clone())).unwrap();
            assert!(close(&x, &xm, 240));
            // ℘(iz) = −℘(z)
            let iz = BigComplex {
                re: Float::with_val(300, -&z.im),
                im: z.re.clone(),
            };
            let xi = ev.wp(&iz).unwrap();
            assert!(close(&xi, &(-x.clone()), 240));
            // conjugate symmetry
            let xc = ev.wp(&z.conj()).unwrap();
            assert!(close(&xc, &x.conj(), 240));
            // periodicity
            let z1 = &z + &BigComplex::from_f64(300, 1.0, 0.0);
            let zi = &z + &BigComplex::from_f64(300, 0.0, 1.0);
            assert!(close(&ev.wp(&z1).unwrap(), &x, 240));
            assert!(close(&ev.wp(&zi).unwrap(), &x, 240));
            // ℘′² = 4℘³ − g₂℘
            let lhs = y.sqr();
            let rhs = &(&x.sqr() * &x).mul_i64(4) - &x.mul_real(ev.g2());
            assert!(close(&lhs, &rhs, 256 - 16), "residual at {a},{b}");
        }
    }

    #[test]
    fn duplication_consistency() {
        let ev = WpEvaluator::new(PrecisionCtx::new(200));
        let z = BigComplex::from_f64(260, 0.21, 0.33);
        let (x, y) = ev.wp_pair_work(&z).unwrap();
        let (x2, y2) = ev.double(&x, &y);
        let direct = ev.wp_pair(&z.mul_pow2(1)).unwrap();
        assert!(close(&direct.0, &x2, 180));
        assert!(close(&direct.1, &y2, 180));
    }

    #[test]
    fn half_period_value() {
        // ℘(1/2) on ℤ[i] is the positive root of 4x³ − g₂x, i.e. Ω².
        let ev = WpEvaluator::new(PrecisionCtx::new(128));
        let x = ev.wp(&BigComplex::from_f64(128, 0.5, 0.0)).unwrap();
        let omega2 = Float::with_val(128, ev.omega().square_ref());
        assert!(close(&x, &BigComplex::from_real(omega2), 120));
    }
}
