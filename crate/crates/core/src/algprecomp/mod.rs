//! Exact algebraic data for one curve: the minimal polynomial `G(X)` of
//! `u = ℘(Ω∞/f, L)` over ℤ[i], the polynomial `J(X)` with `℘′(Ω∞/f) = J(u)`,
//! and the power sums `s_m = Trace(u^m)`.
//!
//! Both polynomials are reconstructed from the `d` Galois conjugates
//! `u_𝔟 = ℘(ψ(𝔟)Ω∞/f, L)` computed numerically, then rounded and checked by
//! exact identities.

mod bundle;
mod zipoly;

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::{Float, Integer};
use thiserror::Error;

use crate::curvefam::{psi, CurveError, CurveParams};
use crate::gaussint::{ray_class_reps, GaussInt, IdealRep};
use crate::mpcomplex::{
    reduce_ratio_to_fundamental, BigComplex, PrecisionCtx, WpError, WpEvaluator,
};
use crate::traceexact::newton_power_sums;

pub use bundle::{
    bundle_from_str, bundle_to_string, load_bundle, save_bundle, BundleError, BUNDLE_VERSION,
};
pub use zipoly::ZiPoly;

/// Rounded coefficients must lie this close (2⁻³²) to ℤ[i].
pub const ROUNDING_TOL_BITS: u32 = 32;
/// Upper end of the precision ramp.
pub const MAX_PREC_BITS: u32 = 1 << 20;

#[derive(Debug, Error)]
pub enum PrecompError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Wp(#[from] WpError),
    #[error("conjugates {0} and {1} coincide numerically; the ψ convention is inconsistent")]
    CoincidentConjugates(usize, usize),
    #[error("{what}: rounding failed up to {prec} bits (worst coefficient X^{index}, distance 2^{log2_dist:.1})")]
    Rounding {
        what: &'static str,
        prec: u32,
        index: usize,
        log2_dist: f64,
    },
    #[error("exact verification failed: {0}")]
    Verification(String),
}

/// One Galois conjugate: the ideal, `ψ(𝔟)`, `u_𝔟` and `℘′` at the point.
#[derive(Clone, Debug)]
pub struct ConjugatePoint {
    pub ideal: IdealRep,
    pub psi: GaussInt,
    pub u: BigComplex,
    /// The full derivative `℘′(ψ(𝔟)Ω∞/f, L)` (twice the curve's `y`).
    pub v: BigComplex,
}

/// Sign `ε` in `Ω∞ = ε·Ω∞⁺/α(E)`.
///
/// Both signs generate the same lattice and leave `u_𝔟` and `G` unchanged;
/// they flip `℘′_𝔟`, `J` and hence `c_p⁺`. The reference digits for `D < 0`
/// (`fixtures/digits-*.txt`) correspond to `ε = −1`; under `ε = +1` every
/// `D = −14` digit comes out negated.
pub fn period_sign(params: &CurveParams) -> i32 {
    if params.d_param < 0 {
        -1
    } else {
        1
    }
}

/// `1/Ω∞ = ε·α(E)·(|D|/c)^{1/4}/Ω` with `c = 1` for `D > 0` and `c = 4` for
/// `D < 0`, so that `Ω∞·α(E) = ε·Ω∞⁺` with `Ω∞⁺` the least positive real
/// period.
fn inverse_period(params: &CurveParams, omega: &Float) -> BigComplex {
    let prec = omega.prec();
    let mut scale = Float::with_val(prec, params.d_param.unsigned_abs());
    if params.d_param < 0 {
        scale /= 4u32;
    }
    let root4 = scale.sqrt().sqrt();
    let real = Float::with_val(prec, &root4 / omega) * period_sign(params);
    BigComplex::from_gauss(prec, &params.alpha).mul_real(&real)
}

/// `Ω∞⁺`, the least positive real period of `E_D`, at the given precision.
pub fn real_period(params: &CurveParams, prec_bits: u32) -> Float {
    let omega = crate::mpcomplex::lemniscate_period_with_iterations(prec_bits).0;
    let mut scale = Float::with_val(prec_bits, params.d_param.unsigned_abs());
    if params.d_param < 0 {
        scale /= 4u32;
    }
    omega / scale.sqrt().sqrt()
}

/// The `d` conjugates of `(u, ℘′)` at `ctx` precision, one per ray class.
pub fn conjugate_points(
    params: &CurveParams,
    ctx: &PrecisionCtx,
) -> Result<Vec<ConjugatePoint>, PrecompError> {
    let ev = WpEvaluator::new(*ctx);
    conjugate_points_with(params, &ev)
}

fn conjugate_points_with(
    params: &CurveParams,
    ev: &WpEvaluator,
) -> Result<Vec<ConjugatePoint>, PrecompError> {
    let ctx = ev.ctx();
    let work = ctx.work_prec();
    let reps = ray_class_reps(&params.conductor());
    let nf = params.f_gen.norm();
    let f_conj = params.f_gen.conj();
    let inv = inverse_period(params, ev.omega());
    let inv2 = inv.sqr();
    let inv3 = &inv2 * &inv;

    let points: Result<Vec<ConjugatePoint>, PrecompError> = reps
        .par_iter()
        .map(|b| {
            let psi_b = psi(params, b)?;
            // ψ(𝔟)/f = ψ(𝔟)·conj(f)/N(f), reduced exactly mod ℤ[i]
            let (num, _) = reduce_ratio_to_fundamental(&(&psi_b * &f_conj), &nf);
            let z = BigComplex::from_gauss_ratio(work, &num, &nf);
            let (x, y) = ev.wp_pair_work(&z)?;
            Ok(ConjugatePoint {
                ideal: b.clone(),
                psi: psi_b,
                u: (&x * &inv2).with_prec(ctx.prec_bits),
                v: (&y * &inv3).with_prec(ctx.prec_bits),
            })
        })
        .collect();
    let points = points?;
    check_distinct(&points)?;
    Ok(points)
}

fn check_distinct(points: &[ConjugatePoint]) -> Result<(), PrecompError> {
    let approx: Vec<(f64, f64)> = points.iter().map(|p| p.u.to_f64_pair()).collect();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let (dx, dy) = (approx[a].0 - approx[b].0, approx[a].1 - approx[b].1);
            let scale = 1.0 + approx[a].0.abs() + approx[a].1.abs();
            if (dx.abs() + dy.abs()) / scale < 1e-9 {
                let diff = (&points[a].u - &points[b].u).abs();
                let mut tol = points[a].u.abs() + 1u32;
                tol >>= points[a].u.prec() / 2;
                if diff <= tol {
                    return Err(PrecompError::CoincidentConjugates(a, b));
                }
            }
        }
    }
    Ok(())
}

/// `∏ (X − u_𝔟)` as complex coefficients, constant term first.
fn product_poly(points: &[ConjugatePoint], prec: u32) -> Vec<BigComplex> {
    let mut poly = vec![BigComplex::from_f64(prec, 1.0, 0.0)];
    for p in points {
        let u = p.u.with_prec(prec);
        let mut next = vec![BigComplex::zero(prec); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j + 1] = &next[j + 1] + c;
            next[j] = &next[j] - &(c * &u);
        }
        poly = next;
    }
    poly
}

fn log2_f(x: &Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        let (m, e) = x.to_f64_exp();
        m.abs().log2() + e as f64
    }
}

/// Round complex coefficients (after scaling by `denom`) to ℤ[i]; reports
/// the worst coefficient when any is farther than 2⁻³² from a lattice point.
fn round_coeffs(coeffs: &[BigComplex], denom: &Integer) -> Result<Vec<GaussInt>, (usize, f64)> {
    let mut out = Vec::with_capacity(coeffs.len());
    let mut worst = (0usize, f64::NEG_INFINITY);
    for (j, c) in coeffs.iter().enumerate() {
        let prec = c.prec();
        let scaled = c.mul_real(&Float::with_val(prec, denom));
        let (z, dist) = scaled.round_to_gauss();
        let l = log2_f(&dist);
        if l > worst.1 {
            worst = (j, l);
        }
        out.push(z);
    }
    if worst.1 > -(ROUNDING_TOL_BITS as f64) {
        Err(worst)
    } else {
        Ok(out)
    }
}

/// `ε = (conj(fα)/fα)²`, the unit with `conj(u_𝔟) = ε·u_𝔟′` for some `𝔟′`.
pub fn conjugation_unit(params: &CurveParams) -> GaussInt {
    let fa = &params.f_alpha;
    let q = fa
        .conj()
        .div_exact(fa)
        .expect("the ideal (fα) is stable under conjugation");
    &q * &q
}

/// `conj(G)(X) = G(εX)` coefficient-wise: `conj(g_j) = ε^{d−j}·g_j` for
/// `ε = ±1`, the exact form of the set of conjugates being closed under
/// `u ↦ ε·conj(u)`.
pub fn has_conjugation_symmetry(g: &ZiPoly, params: &CurveParams) -> bool {
    let eps = conjugation_unit(params);
    let Some(d) = g.degree() else {
        return false;
    };
    g.coeffs.iter().enumerate().all(|(j, c)| {
        let twist = eps.pow((d - j) as u32);
        c.conj() == &twist * c
    })
}

/// Record of how a bundle was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub g_prec_bits: u32,
    pub j_prec_bits: u32,
    pub psi_convention: String,
    pub period_convention: String,
    pub checks: Vec<String>,
}

pub const PSI_CONVENTION: &str = "conj-quartic-symbol-of-D-times-primary";

/// Provenance tag for [`period_sign`].
pub fn period_convention(params: &CurveParams) -> String {
    format!("omega-sign {:+}", period_sign(params))
}

/// Everything the L-value computation needs for one `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecompBundle {
    pub params: CurveParams,
    pub g: ZiPoly,
    pub j: ZiPoly,
    /// `s_0 … s_{d−1}`.
    pub power_sums: Vec<GaussInt>,
    pub provenance: Provenance,
}

/// Drives the precision ramp and memoizes conjugate points per precision.
pub struct Precomputer<'a> {
    params: &'a CurveParams,
    points: BTreeMap<u32, Vec<ConjugatePoint>>,
    max_prec: u32,
}

impl<'a> Precomputer<'a> {
    pub fn new(params: &'a CurveParams) -> Self {
        Precomputer {
            params,
            points: BTreeMap::new(),
            max_prec: MAX_PREC_BITS,
        }
    }

    pub fn with_max_prec(mut self, max_prec: u32) -> Self {
        self.max_prec = max_prec;
        self
    }

    /// `256 + 16·d` bits.
    pub fn start_prec(&self) -> u32 {
        256 + 16 * self.params.degree as u32
    }

    pub fn points(&mut self, prec: u32) -> Result<&[ConjugatePoint], PrecompError> {
        if !self.points.contains_key(&prec) {
            let pts = conjugate_points(self.params, &PrecisionCtx::new(prec))?;
            // keep at most the two most recent precisions
            while self.points.len() >= 2 {
                let first = *self.points.keys().next().expect("nonempty");
                self.points.remove(&first);
            }
            self.points.insert(prec, pts);
        }
        Ok(&self.points[&prec])
    }

    fn g_at(&mut self, prec: u32) -> Result<Result<ZiPoly, (usize, f64)>, PrecompError> {
        let pts = self.points(prec)?.to_vec();
        let coeffs = product_poly(&pts, prec);
        Ok(round_coeffs(&coeffs, &Integer::from(1)).map(ZiPoly::integral))
    }

    /// `G(X) = ∏(X − u_𝔟)`, accepted once it rounds cleanly at two
    /// consecutive precisions with identical results. Returns `G` and the
    /// higher of the two precisions.
    pub fn build_g(&mut self) -> Result<(ZiPoly, u32), PrecompError> {
        let mut prec = self.start_prec();
        let mut prev: Option<ZiPoly> = None;
        let mut worst = (0, 0.0);
        while prec <= self.max_prec {
            match self.g_at(prec)? {
                Ok(g) => {
                    if prev.as_ref() == Some(&g) {
                        self.check_g_residuals(&g, prec)?;
                        return Ok((g, prec));
                    }
                    prev = Some(g);
                }
                Err(w) => {
                    worst = w;
                    prev = None;
                }
            }
            prec *= 2;
        }
        Err(PrecompError::Rounding {
            what: "G",
            prec: prec / 2,
            index: worst.0,
            log2_dist: worst.1,
        })
    }

    fn check_g_residuals(&mut self, g: &ZiPoly, prec: u32) -> Result<(), PrecompError> {
        let pts = self.points(prec)?.to_vec();
        for (k, p) in pts.iter().enumerate() {
            let val = g.eval(&p.u);
            // scale: Σ |g_j| |u|^j
            let mut scale = Float::with_val(prec, 0);
            let au = p.u.abs();
            for c in g.coeffs.iter().rev() {
                scale *= &au;
                scale += BigComplex::from_gauss(prec, c).abs();
            }
            let mut tol = scale;
            tol >>= 64;
            if val.abs() > tol {
                return Err(PrecompError::Verification(format!(
                    "G(u_{k}) residual too large at {prec} bits"
                )));
            }
        }
        Ok(())
    }

    fn j_at(
        &mut self,
        g: &ZiPoly,
        prec: u32,
    ) -> Result<Result<ZiPoly, (usize, f64)>, PrecompError> {
        let pts = self.points(prec)?.to_vec();
        let coeffs = interpolate_j(g, &pts, prec);
        Ok(recognize_denominator(&coeffs, self.params, prec))
    }

    /// `J(X)` of degree `< d` with `J(u_𝔟) = ℘′_𝔟`, accepted when its
    /// rounding agrees at two consecutive precisions and
    /// `J² ≡ 4X³ − 4DX (mod G)` holds exactly.
    pub fn build_j(&mut self, g: &ZiPoly, start_prec: u32) -> Result<(ZiPoly, u32), PrecompError> {
        let mut prec = start_prec;
        let mut prev: Option<ZiPoly> = None;
        let mut worst = (0, 0.0);
        while prec <= self.max_prec {
            match self.j_at(g, prec)? {
                Ok(j) => {
                    if prev.as_ref() == Some(&j) {
                        verify_j_congruence(self.params, g, &j)?;
                        return Ok((j, prec));
                    }
                    prev = Some(j);
                }
                Err(w) => {
                    worst = w;
                    prev = None;
                }
            }
            prec *= 2;
        }
        Err(PrecompError::Rounding {
            what: "J",
            prec: prec / 2,
            index: worst.0,
            log2_dist: worst.1,
        })
    }
}

/// Lagrange interpolation through `(u_𝔟, ℘′_𝔟)`:
/// `J = Σ_𝔟 ℘′_𝔟 · q_𝔟(X)/q_𝔟(u_𝔟)` with `q_𝔟 = G/(X − u_𝔟)`.
fn interpolate_j(g: &ZiPoly, points: &[ConjugatePoint], prec: u32) -> Vec<BigComplex> {
    let d = g.degree().expect("nonzero G");
    let gc: Vec<BigComplex> = g
        .coeffs
        .iter()
        .map(|c| BigComplex::from_gauss(prec, c))
        .collect();
    let partials: Vec<Vec<BigComplex>> = points
        .par_iter()
        .map(|p| {
            let u = p.u.with_prec(prec);
            let mut q = vec![BigComplex::zero(prec); d];
            q[d - 1] = gc[d].clone();
            for j in (1..d).rev() {
                q[j - 1] = &gc[j] + &(&u * &q[j]);
            }
            let mut qu = BigComplex::zero(prec);
            for c in q.iter().rev() {
                qu = &(&qu * &u) + c;
            }
            let w = p.v.with_prec(prec).div(&qu);
            q.iter().map(|c| c * &w).collect()
        })
        .collect();
    let mut j = vec![BigComplex::zero(prec); d];
    for part in &partials {
        for (acc, c) in j.iter_mut().zip(part) {
            *acc = &*acc + c;
        }
    }
    j
}

/// Find the smallest integer `δ` dividing a power of `2Δ` such that `δ·J`
/// rounds to ℤ[i], and return the rounded `J` over that denominator.
fn recognize_denominator(
    coeffs: &[BigComplex],
    params: &CurveParams,
    prec: u32,
) -> Result<ZiPoly, (usize, f64)> {
    let base = Integer::from(2 * params.delta);
    let max_mag = coeffs
        .iter()
        .map(|c| log2_f(&c.abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut delta = Integer::from(1);
    let mut worst = (0, 0.0);
    loop {
        let delta_bits = delta.significant_bits() as f64;
        if max_mag + delta_bits + (ROUNDING_TOL_BITS as f64) + 32.0 > prec as f64 {
            return Err(worst);
        }
        match round_coeffs(coeffs, &delta) {
            Ok(nums) => {
                let mut j = ZiPoly::new(nums, delta);
                j.reduce_denominator();
                return Ok(j);
            }
            Err(w) => worst = w,
        }
        delta *= &base;
    }
}

/// `J² ≡ 4X³ − 4DX (mod G)` in ℤ[i][1/f][X].
pub fn verify_j_congruence(
    params: &CurveParams,
    g: &ZiPoly,
    j: &ZiPoly,
) -> Result<(), PrecompError> {
    let target = ZiPoly::integral(vec![
        GaussInt::zero(),
        GaussInt::from_int(-4 * params.d_param),
        GaussInt::zero(),
        GaussInt::from_int(4),
    ]);
    let diff = j.mul(j).sub(&target).rem_monic(g);
    if diff.is_zero() {
        Ok(())
    } else {
        Err(PrecompError::Verification(
            "J² ≢ 4X³ − 4DX (mod G)".to_string(),
        ))
    }
}

/// Separability, `gcd(G, G′) = 1` over ℚ(i). Checked modulo large split
/// primes `q` (with `i ↦ √−1 mod q`): a trivial gcd after reduction proves a
/// trivial gcd in characteristic zero.
pub fn is_separable(g: &ZiPoly) -> bool {
    for start in [1u64 << 61, (1u64 << 62) + 1_000_003] {
        let q = Integer::from(next_split_prime(start));
        let r = crate::gaussint::sqrt_minus_one_mod(&q);
        let red = |p: &ZiPoly| -> Vec<Integer> {
            p.coeffs
                .iter()
                .map(|c| (Integer::from(&c.im * &r) + &c.re).div_rem_euc(q.clone()).1)
                .collect()
        };
        if poly_gcd_degree_mod(red(g), red(&g.derivative()), &q) == 0 {
            return true;
        }
    }
    false
}

fn next_split_prime(start: u64) -> u64 {
    let mut p = start | 1;
    while !(p % 4 == 1 && crate::primes::is_prime(p)) {
        p += 2;
    }
    p
}

fn poly_gcd_degree_mod(mut a: Vec<Integer>, mut b: Vec<Integer>, q: &Integer) -> usize {
    let trim = |v: &mut Vec<Integer>| {
        while v.last().is_some_and(|c| *c == 0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let inv = b.last().expect("nonempty").clone().invert(q).expect("unit");
        while a.len() >= b.len() {
            let top = Integer::from(a.last().expect("nonempty") * &inv) % q;
            let shift = a.len() - b.len();
            for (k, c) in b.iter().enumerate() {
                a[shift + k] = (&a[shift + k] - Integer::from(&top * c))
                    .div_rem_euc(q.clone())
                    .1;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Build, verify and package the algebraic data for `params`.
pub fn build_bundle(params: &CurveParams) -> Result<PrecompBundle, PrecompError> {
    let mut pc = Precomputer::new(params);
    let (g, g_prec) = pc.build_g()?;
    let (j, j_prec) = pc.build_j(&g, g_prec / 2)?;
    let power_sums = newton_power_sums(&g, params.degree)
        .map_err(|e| PrecompError::Verification(e.to_string()))?
        .values;
    let mut checks = vec![
        "G monic integral".to_string(),
        "G(u) residuals".to_string(),
        "J^2 = 4X^3-4DX mod G".to_string(),
    ];
    if !has_conjugation_symmetry(&g, params) {
        return Err(PrecompError::Verification(
            "conj(G)(X) != G(eps X)".to_string(),
        ));
    }
    checks.push("conj(G)(X) = G(eps X)".to_string());
    let bundle = PrecompBundle {
        params: params.clone(),
        g,
        j,
        power_sums,
        provenance: Provenance {
            g_prec_bits: g_prec,
            j_prec_bits: j_prec,
            psi_convention: PSI_CONVENTION.to_string(),
            period_convention: period_convention(params),
            checks,
        },
    };
    verify_bundle(&bundle)?;
    Ok(bundle)
}

/// The cheap exact checks re-run whenever a bundle is loaded.
pub fn verify_bundle(bundle: &PrecompBundle) -> Result<(), PrecompError> {
    let d = bundle.params.degree;
    if bundle.provenance.period_convention != period_convention(&bundle.params) {
        return Err(PrecompError::Verification(format!(
            "bundle uses period convention {:?}, expected {:?}",
            bundle.provenance.period_convention,
            period_convention(&bundle.params)
        )));
    }
    if bundle.g.degree() != Some(d) || !bundle.g.is_monic() {
        return Err(PrecompError::Verification(format!(
            "G must be monic integral of degree {d}"
        )));
    }
    if !has_conjugation_symmetry(&bundle.g, &bundle.params) {
        return Err(PrecompError::Verification(
            "conj(G)(X) != G(eps X)".to_string(),
        ));
    }
    if bundle.j.degree().is_some_and(|k| k >= d) {
        return Err(PrecompError::Verification("deg J >= d".to_string()));
    }
    if bundle.power_sums.len() != d || bundle.power_sums[0] != GaussInt::from_int(d as i64) {
        return Err(PrecompError::Verification(
            "power sums must have length d and s_0 = d".to_string(),
        ));
    }
    // the denominator of J may only involve primes dividing N(f) = 2^a·Δ^b
    let mut rest = bundle.j.denom.clone();
    for q in crate::gaussint::factor_rational(&Integer::from(2 * bundle.params.delta)) {
        while rest.is_divisible(&q) {
            rest.div_exact_mut(&q);
        }
    }
    if rest != 1 {
        return Err(PrecompError::Verification(
            "J denominator has primes outside the conductor".to_string(),
        ));
    }
    verify_j_congruence(&bundle.params, &bundle.g, &bundle.j)
}
