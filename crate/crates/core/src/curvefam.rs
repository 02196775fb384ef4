//! Parameters of `E_D : y² = x³ − Dx`: conductor, the chosen generators,
//! ray-class degree, the Größencharacter and brute-force point counts.

use rug::Integer;
use thiserror::Error;

use crate::gaussint::{
    euler_phi, factor, gcd, normalize_primary, quartic_symbol, GaussError, GaussInt, IdealRep, Unit,
};
use crate::primes::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("D must be nonzero")]
    ZeroD,
    #[error("D = {0} is divisible by a fourth power")]
    NotFourthPowerFree(i64),
    #[error("D = {0} has no odd prime factor")]
    NoOddPrime(i64),
    #[error("ideal {b} is not coprime to the conductor {f}")]
    NotCoprimeToConductor { b: IdealRep, f: GaussInt },
    #[error("p = {p} is a bad or excluded prime for D = {d}")]
    BadPrime { d: i64, p: u64 },
    #[error("{0}")]
    UncoveredShape(String),
    #[error(transparent)]
    Gauss(#[from] GaussError),
}

/// Which of the four conductor-generator cases applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveCase {
    /// `D > 0`, `D ≡ 1 (mod 4)`
    PositiveOneMod4,
    /// `D < 0`, `D ≡ 1 (mod 4)`
    NegativeOneMod4,
    /// `D > 0`, `D ≢ 1 (mod 4)`
    PositiveOther,
    /// `D < 0`, `D ≢ 1 (mod 4)`
    NegativeOther,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveParams {
    pub d_param: i64,
    /// Product of the distinct primes dividing `|D|`.
    pub delta: i64,
    pub case: CurveCase,
    pub f_gen: GaussInt,
    /// `Ω∞⁺ = Ω∞·α(E)`.
    pub alpha: GaussInt,
    pub f_alpha: GaussInt,
    /// `[K(E_f) : K] = φ(f)/4`.
    pub degree: usize,
    /// Number of roots of unity in `K = ℚ(i)`.
    pub w: u32,
}

fn distinct_primes(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn make_params(d_param: i64) -> Result<CurveParams, CurveError> {
    if d_param == 0 {
        return Err(CurveError::ZeroD);
    }
    let primes = distinct_primes(d_param.unsigned_abs());
    if primes.iter().any(|&(_, e)| e >= 4) {
        return Err(CurveError::NotFourthPowerFree(d_param));
    }
    if primes.iter().all(|&(q, _)| q == 2) {
        return Err(CurveError::NoOddPrime(d_param));
    }
    let delta: i64 = primes.iter().map(|&(q, _)| q as i64).product();
    let one_mod_4 = d_param.rem_euclid(4) == 1;
    let one_plus_i = GaussInt::new(1, 1);
    let delta_g = GaussInt::from_int(delta);
    let case = match (d_param > 0, one_mod_4) {
        (true, true) => CurveCase::PositiveOneMod4,
        (false, true) => CurveCase::NegativeOneMod4,
        (true, false) => CurveCase::PositiveOther,
        (false, false) => CurveCase::NegativeOther,
    };
    let (f_gen, alpha) = match case {
        CurveCase::PositiveOneMod4 => (&GaussInt::new(2, 2) * &delta_g, GaussInt::one()),
        CurveCase::NegativeOneMod4 => (&one_plus_i.pow(3) * &delta_g, one_plus_i.clone()),
        CurveCase::PositiveOther => (GaussInt::from_int(4 * delta), GaussInt::one()),
        CurveCase::NegativeOther => (GaussInt::from_int(4 * delta), one_plus_i.clone()),
    };
    let f_alpha = &f_gen * &alpha;
    let phi = euler_phi(&IdealRep::new(f_gen.clone())?);
    let degree = Integer::from(phi.div_exact_ref(&Integer::from(4)))
        .to_usize()
        .expect("degree fits in usize");
    Ok(CurveParams {
        d_param,
        delta,
        case,
        f_gen,
        alpha,
        f_alpha,
        degree,
        w: 4,
    })
}

impl CurveParams {
    pub fn conductor(&self) -> IdealRep {
        IdealRep::new(self.f_gen.clone()).expect("conductor generator is nonzero")
    }

    pub fn d_gauss(&self) -> GaussInt {
        GaussInt::from_int(self.d_param)
    }
}

/// `ψ_E(𝔟)` for an ideal coprime to the conductor.
///
/// On a primary prime `π ∤ 2D` the value is `conj(χ_π(D))·π`; the map is
/// extended multiplicatively through the primary generator of `𝔟`.
pub fn psi(params: &CurveParams, b: &IdealRep) -> Result<GaussInt, CurveError> {
    if !gcd(b.gen(), &params.f_gen)?.is_unit() {
        return Err(CurveError::NotCoprimeToConductor {
            b: b.clone(),
            f: params.f_gen.clone(),
        });
    }
    let beta = normalize_primary(b.gen())?;
    let d = params.d_gauss();
    let mut chi = Unit::ONE;
    for (pi, e) in factor(&beta)? {
        let pi = normalize_primary(&pi)?;
        chi = chi * quartic_symbol(&d, &pi)?.pow(e);
    }
    Ok(beta.mul_i_pow(chi.conj().exponent()))
}

fn legendre(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let r = Integer::from(a)
        .pow_mod(&Integer::from((p - 1) / 2), &Integer::from(p))
        .expect("p > 0");
    if r == 1 {
        1
    } else {
        -1
    }
}

/// `a_p = p + 1 − #E(𝔽_p)` by sweeping every `x`.
pub fn ap_point_count(d_param: i64, p: u64) -> Result<i64, CurveError> {
    let bad = p < 3 || (d_param as i128).rem_euclid(p as i128) == 0 || !is_prime(p);
    if bad {
        return Err(CurveError::BadPrime { d: d_param, p });
    }
    let pi = p as i128;
    let dm = (d_param as i128).rem_euclid(pi);
    let mut affine: i64 = 0;
    for x in 0..pi {
        let rhs = (x * x % pi * x - dm * x).rem_euclid(pi);
        affine += 1 + legendre(rhs as i64, p);
    }
    Ok(p as i64 - affine)
}

/// `[K(E_𝔥) : K]` for the ideal shapes whose degree is known in closed form.
pub fn torsion_field_degree(params: &CurveParams, h: &IdealRep) -> Result<Integer, CurveError> {
    let f = params.conductor();
    if f.divides(h) {
        return Ok(euler_phi(h) / 4u32);
    }
    let d = params.d_param;
    let (two_adic, odd_part) = {
        let mut m = d.unsigned_abs();
        let mut a = 0u32;
        while m.is_multiple_of(2) {
            m /= 2;
            a += 1;
        }
        (a, m as i64)
    };
    let factors = factor(h.gen())?;
    let one_plus_i = GaussInt::new(1, 1);
    if factors.len() == 1 && factors[0].0 == one_plus_i {
        let odd_prime_odd_power = distinct_primes(d.unsigned_abs())
            .iter()
            .any(|&(q, e)| q % 2 == 1 && e % 2 == 1);
        if odd_prime_odd_power {
            let k = factors[0].1;
            return Ok(match k {
                1 => Integer::from(1),
                _ => Integer::from(1) << (k - 1),
            });
        }
    }
    if two_adic == 0 && *h == IdealRep::new(GaussInt::from_int(d))? {
        return Ok(euler_phi(h));
    }
    if (two_adic == 1 || two_adic == 3) && *h == IdealRep::new(GaussInt::from_int(odd_part))? {
        return Ok(euler_phi(h));
    }
    Err(CurveError::UncoveredShape(format!(
        "no closed-form torsion field degree for h = {h} and D = {d}"
    )))
}
