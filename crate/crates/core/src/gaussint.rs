//! Exact arithmetic in the Gaussian integers ℤ[i].
//!
//! Everything algebraic in this crate lives over ℤ[i]: conductors, ray-class
//! representatives, Größencharacter values and the coefficients of the
//! precomputed polynomials. Components are arbitrary precision.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::Integer;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaussError {
    #[error("gcd of two zero Gaussian integers is undefined")]
    GcdOfZeros,
    #[error("cannot factor zero")]
    FactorZero,
    #[error("{0} is even (norm divisible by 2); no primary associate exists")]
    EvenInput(GaussInt),
    #[error("modulus {0} must be an odd primary Gaussian prime")]
    BadModulus(GaussInt),
    #[error("{a} is not coprime to {pi}")]
    NotCoprime { a: GaussInt, pi: GaussInt },
    #[error("the zero ideal is not allowed here")]
    ZeroIdeal,
}

/// A Gaussian integer `re + im·i`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussInt {
    pub re: Integer,
    pub im: Integer,
}

impl GaussInt {
    pub fn new(re: impl Into<Integer>, im: impl Into<Integer>) -> Self {
        GaussInt {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn zero() -> Self {
        GaussInt::default()
    }

    pub fn one() -> Self {
        GaussInt::new(1, 0)
    }

    pub fn i() -> Self {
        GaussInt::new(0, 1)
    }

    pub fn from_int(n: impl Into<Integer>) -> Self {
        GaussInt::new(n, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_unit(&self) -> bool {
        self.norm() == 1
    }

    pub fn norm(&self) -> Integer {
        Integer::from(self.re.square_ref()) + Integer::from(self.im.square_ref())
    }

    pub fn conj(&self) -> Self {
        GaussInt::new(self.re.clone(), Integer::from(-&self.im))
    }

    /// Multiply by `i^k`.
    pub fn mul_i_pow(&self, k: u32) -> Self {
        match k % 4 {
            0 => self.clone(),
            1 => GaussInt::new(Integer::from(-&self.im), self.re.clone()),
            2 => -self.clone(),
            _ => GaussInt::new(self.im.clone(), Integer::from(-&self.re)),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussInt::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mul_int(&self, n: &Integer) -> Self {
        GaussInt::new(Integer::from(&self.re * n), Integer::from(&self.im * n))
    }

    /// Euclidean division with the quotient rounded to the nearest lattice
    /// point, so that `norm(r) <= norm(b) / 2`.
    pub fn div_rem(&self, b: &GaussInt) -> (GaussInt, GaussInt) {
        let n = b.norm();
        assert!(n != 0, "division by zero Gaussian integer");
        let num = self * &b.conj();
        let q = GaussInt::new(round_div(&num.re, &n), round_div(&num.im, &n));
        let r = self - &(&q * b);
        (q, r)
    }

    /// Exact quotient `self / b`, or `None` when `b` does not divide `self`.
    pub fn div_exact(&self, b: &GaussInt) -> Option<GaussInt> {
        let n = b.norm();
        if n == 0 {
            return None;
        }
        let num = self * &b.conj();
        if num.re.is_divisible(&n) && num.im.is_divisible(&n) {
            Some(GaussInt::new(
                Integer::from(num.re.div_exact_ref(&n)),
                Integer::from(num.im.div_exact_ref(&n)),
            ))
        } else {
            None
        }
    }

    pub fn divides(&self, other: &GaussInt) -> bool {
        other.div_exact(self).is_some()
    }

    /// The first-quadrant associate (`re > 0`, `im >= 0`); zero maps to zero.
    pub fn normalize(&self) -> GaussInt {
        if self.is_zero() {
            return GaussInt::zero();
        }
        for k in 0..4 {
            let z = self.mul_i_pow(k);
            if z.re > 0 && z.im >= 0 {
                return z;
            }
        }
        unreachable!("every nonzero Gaussian integer has a first-quadrant associate")
    }

    pub fn is_odd(&self) -> bool {
        self.norm().is_odd()
    }
}

/// `round(a / n)` for `n > 0`, halves rounded up.
fn round_div(a: &Integer, n: &Integer) -> Integer {
    let two_n = Integer::from(n * 2);
    let shifted = Integer::from(a * 2) + n;
    shifted.div_rem_floor(two_n).0
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re == 0, self.im == 0) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im < 0 {
                    write!(f, "{}-{}i", self.re, Integer::from(-&self.im))
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

impl fmt::Debug for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

impl From<i64> for GaussInt {
    fn from(n: i64) -> Self {
        GaussInt::from_int(n)
    }
}

impl From<(i64, i64)> for GaussInt {
    fn from((re, im): (i64, i64)) -> Self {
        GaussInt::new(re, im)
    }
}

impl Add<&GaussInt> for &GaussInt {
    type Output = GaussInt;
    fn add(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(
            Integer::from(&self.re + &rhs.re),
            Integer::from(&self.im + &rhs.im),
        )
    }
}

impl Sub<&GaussInt> for &GaussInt {
    type Output = GaussInt;
    fn sub(self, rhs: &GaussInt) -> GaussInt {
        GaussInt::new(
            Integer::from(&self.re - &rhs.re),
            Integer::from(&self.im - &rhs.im),
        )
    }
}

impl Mul<&GaussInt> for &GaussInt {
    type Output = GaussInt;
    fn mul(self, rhs: &GaussInt) -> GaussInt {
        let ac = Integer::from(&self.re * &rhs.re);
        let bd = Integer::from(&self.im * &rhs.im);
        let ad = Integer::from(&self.re * &rhs.im);
        let bc = Integer::from(&self.im * &rhs.re);
        GaussInt::new(ac - bd, ad + bc)
    }
}

impl Add for GaussInt {
    type Output = GaussInt;
    fn add(mut self, rhs: GaussInt) -> GaussInt {
        self += &rhs;
        self
    }
}

impl Sub for GaussInt {
    type Output = GaussInt;
    fn sub(mut self, rhs: GaussInt) -> GaussInt {
        self -= &rhs;
        self
    }
}

impl Mul for GaussInt {
    type Output = GaussInt;
    fn mul(self, rhs: GaussInt) -> GaussInt {
        &self * &rhs
    }
}

impl AddAssign<&GaussInt> for GaussInt {
    fn add_assign(&mut self, rhs: &GaussInt) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussInt> for GaussInt {
    fn sub_assign(&mut self, rhs: &GaussInt) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussInt> for GaussInt {
    fn mul_assign(&mut self, rhs: &GaussInt) {
        *self = &*self * rhs;
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt::new(-self.re, -self.im)
    }
}

/// A fourth root of unity `i^k`, used for quartic residue symbols and for
/// unit bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Unit(u8);

impl Unit {
    pub const ONE: Unit = Unit(0);
    pub const I: Unit = Unit(1);
    pub const MINUS_ONE: Unit = Unit(2);
    pub const MINUS_I: Unit = Unit(3);

    pub fn from_exponent(k: u32) -> Unit {
        Unit((k % 4) as u8)
    }

    pub fn exponent(self) -> u32 {
        self.0 as u32
    }

    pub fn pow(self, e: u32) -> Unit {
        Unit::from_exponent(self.0 as u32 * (e % 4))
    }

    pub fn conj(self) -> Unit {
        Unit((4 - self.0) % 4)
    }

    pub fn to_gauss(self) -> GaussInt {
        GaussInt::one().mul_i_pow(self.0 as u32)
    }
}

impl Mul for Unit {
    type Output = Unit;

    fn mul(self, other: Unit) -> Unit {
        Unit((self.0 + other.0) % 4)
    }
}

/// An integral ideal of ℤ[i], stored by its first-quadrant generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdealRep {
    gen: GaussInt,
}

impl IdealRep {
    pub fn new(gen: GaussInt) -> Result<Self, GaussError> {
        if gen.is_zero() {
            return Err(GaussError::ZeroIdeal);
        }
        Ok(IdealRep {
            gen: gen.normalize(),
        })
    }

    pub fn gen(&self) -> &GaussInt {
        &self.gen
    }

    pub fn norm(&self) -> Integer {
        self.gen.norm()
    }

    pub fn divides(&self, other: &IdealRep) -> bool {
        self.gen.divides(&other.gen)
    }
}

impl fmt::Display for IdealRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.gen)
    }
}

pub fn norm(z: &GaussInt) -> Integer {
    z.norm()
}

/// A generator of the ideal `(a, b)`, first-quadrant normalized.
pub fn gcd(a: &GaussInt, b: &GaussInt) -> Result<GaussInt, GaussError> {
    if a.is_zero() && b.is_zero() {
        return Err(GaussError::GcdOfZeros);
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let (_, r) = x.div_rem(&y);
        x = y;
        y = r;
    }
    Ok(x.normalize())
}

pub fn is_coprime(a: &GaussInt, b: &GaussInt) -> bool {
    matches!(gcd(a, b), Ok(g) if g.is_unit())
}

/// Prime factorization of a nonzero Gaussian integer.
///
/// Primes are first-quadrant normalized and sorted by `(norm, re)`; the
/// product of `prime^exp` equals `z` up to a unit (see [`factor_with_unit`]).
pub fn factor(z: &GaussInt) -> Result<Vec<(GaussInt, u32)>, GaussError> {
    factor_with_unit(z).map(|(_, f)| f)
}

/// Like [`factor`], also returning the unit `u` with `z = u·∏ prime^exp`.
pub fn factor_with_unit(z: &GaussInt) -> Result<(Unit, Vec<(GaussInt, u32)>), GaussError> {
    if z.is_zero() {
        return Err(GaussError::FactorZero);
    }
    let mut rest = z.clone();
    let mut out = Vec::new();
    for q in factor_rational(&z.norm()) {
        for pi in gaussian_primes_over(&q) {
            let mut e = 0;
            while let Some(next) = rest.div_exact(&pi) {
                rest = next;
                e += 1;
            }
            if e > 0 {
                out.push((pi, e));
            }
        }
    }
    debug_assert!(rest.is_unit());
    let unit = (0..4)
        .map(Unit::from_exponent)
        .find(|u| u.to_gauss() == rest)
        .expect("cofactor after full factorization is a unit");
    out.sort_by(|(a, _), (b, _)| a.norm().cmp(&b.norm()).then_with(|| a.re.cmp(&b.re)));
    Ok((unit, out))
}

/// Distinct rational primes dividing `n > 0`, ascending.
pub(crate) fn factor_rational(n: &Integer) -> Vec<Integer> {
    let mut n = n.clone().abs();
    let mut primes = Vec::new();
    if n <= 1 {
        return primes;
    }
    let mut q = Integer::from(2);
    loop {
        if n == 1 {
            break;
        }
        if n.is_probably_prime(40) != rug::integer::IsPrime::No {
            primes.push(n.clone());
            break;
        }
        if Integer::from(q.square_ref()) > n {
            primes.push(n.clone());
            break;
        }
        if n.is_divisible(&q) {
            primes.push(q.clone());
            while n.is_divisible(&q) {
                n.div_exact_mut(&q);
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    primes.sort();
    primes.dedup();
    primes
}

/// The Gaussian primes (first-quadrant) above a rational prime `q`.
fn gaussian_primes_over(q: &Integer) -> Vec<GaussInt> {
    if *q == 2 {
        return vec![GaussInt::new(1, 1)];
    }
    if q.mod_u(4) == 3 {
        return vec![GaussInt::from_int(q.clone())];
    }
    let r = sqrt_minus_one_mod(q);
    let pi = gcd(&GaussInt::from_int(q.clone()), &GaussInt::new(r, 1)).expect("q nonzero");
    let mut v = vec![pi.clone(), pi.conj().normalize()];
    v.sort_by(|a, b| a.re.cmp(&b.re));
    v
}

/// A square root of −1 modulo a prime `q ≡ 1 (mod 4)`.
pub(crate) fn sqrt_minus_one_mod(q: &Integer) -> Integer {
    let e = Integer::from(q - 1) >> 2;
    let minus_one = Integer::from(q - 1);
    let mut g = Integer::from(2);
    loop {
        let r = g.clone().pow_mod(&e, q).expect("q > 0");
        if Integer::from(r.square_ref()) % q == minus_one {
            return r;
        }
        g += 1;
    }
}

/// The unique associate `u·z` with `u·z ≡ 1 (mod (1+i)³)`.
pub fn normalize_primary(z: &GaussInt) -> Result<GaussInt, GaussError> {
    if !z.is_odd() {
        return Err(GaussError::EvenInput(z.clone()));
    }
    let m = GaussInt::new(2, 2);
    (0..4)
        .map(|k| z.mul_i_pow(k))
        .find(|w| m.divides(&(w - &GaussInt::one())))
        .ok_or_else(|| GaussError::EvenInput(z.clone()))
}

pub fn is_primary(z: &GaussInt) -> bool {
    z.is_odd() && GaussInt::new(2, 2).divides(&(z - &GaussInt::one()))
}

/// Canonical residues of ℤ[i] modulo a nonzero `modulus`.
///
/// The ideal `(modulus)` is the lattice spanned by `(h, 0)` and
/// `(e, g)` where `g = gcd(re, im)` and `h = N/g`; residues are represented
/// as `x + y·i` with `0 <= x < h`, `0 <= y < g`.
#[derive(Debug, Clone)]
pub struct ResidueRing {
    modulus: GaussInt,
    g: Integer,
    h: Integer,
    e: Integer,
}

impl ResidueRing {
    pub fn new(modulus: &GaussInt) -> Result<Self, GaussError> {
        if modulus.is_zero() {
            return Err(GaussError::ZeroIdeal);
        }
        let (a, b) = (&modulus.re, &modulus.im);
        // b·s + a·t = g
        let (g, s, t) = b.clone().gcd_cofactors(a.clone(), Integer::new());
        let n = modulus.norm();
        let h = Integer::from(n.div_exact_ref(&g));
        // modulus·(s + t·i) has imaginary part b·s + a·t = g
        let e = Integer::from(a * &s) - Integer::from(b * &t);
        let mut ring = ResidueRing {
            modulus: modulus.clone(),
            g,
            h,
            e,
        };
        ring.e = ring.e.clone().div_rem_euc(ring.h.clone()).1;
        Ok(ring)
    }

    pub fn modulus(&self) -> &GaussInt {
        &self.modulus
    }

    pub fn order(&self) -> Integer {
        Integer::from(&self.g * &self.h)
    }

    pub fn reduce(&self, z: &GaussInt) -> GaussInt {
        let (t, y) = z.im.clone().div_rem_floor(self.g.clone());
        let x = (&z.re - Integer::from(&t * &self.e))
            .div_rem_euc(self.h.clone())
            .1;
        GaussInt::new(x, y)
    }

    pub fn mul(&self, a: &GaussInt, b: &GaussInt) -> GaussInt {
        self.reduce(&(a * b))
    }

    pub fn pow(&self, a: &GaussInt, e: &Integer) -> GaussInt {
        let mut acc = self.reduce(&GaussInt::one());
        let base = self.reduce(a);
        let bits = e.significant_bits();
        for k in (0..bits).rev() {
            acc = self.mul(&acc, &acc);
            if e.get_bit(k) {
                acc = self.mul(&acc, &base);
            }
        }
        acc
    }

    /// All residues in canonical order (imaginary part outer, real inner).
    pub fn residues(&self) -> impl Iterator<Item = GaussInt> + '_ {
        let g = self
            .g
            .to_u64()
            .expect("residue ring too large to enumerate");
        let h = self
            .h
            .to_u64()
            .expect("residue ring too large to enumerate");
        (0..g).flat_map(move |y| (0..h).map(move |x| GaussInt::new(x, y)))
    }
}

/// The quartic residue character `χ_π(a)`: the fourth root of unity
/// congruent to `a^((Nπ−1)/4)` modulo `π`.
pub fn quartic_symbol(a: &GaussInt, pi: &GaussInt) -> Result<Unit, GaussError> {
    if !pi.is_odd() || !is_primary(pi) {
        return Err(GaussError::BadModulus(pi.clone()));
    }
    if !is_coprime(a, pi) {
        return Err(GaussError::NotCoprime {
            a: a.clone(),
            pi: pi.clone(),
        });
    }
    let ring = ResidueRing::new(pi)?;
    let e = (pi.norm() - 1) >> 2;
    let r = ring.pow(a, &e);
    (0..4)
        .map(Unit::from_exponent)
        .find(|u| ring.reduce(&u.to_gauss()) == r)
        .ok_or_else(|| GaussError::BadModulus(pi.clone()))
}

/// `#(ℤ[i]/𝔥)ˣ = N(𝔥)·∏_{𝔭|𝔥}(1 − 1/N𝔭)`.
pub fn euler_phi(h: &IdealRep) -> Integer {
    let mut phi = h.norm();
    for (pi, _) in factor(h.gen()).expect("IdealRep generator is nonzero") {
        let np = pi.norm();
        phi = Integer::from(phi.div_exact_ref(&np)) * (np - 1);
    }
    phi
}

/// Representatives of `(ℤ[i]/f)ˣ` modulo the units `{±1, ±i}`, i.e. of the
/// ray class group modulo `f` (class number one). Deterministic order.
pub fn ray_class_reps(f: &IdealRep) -> Vec<IdealRep> {
    let ring = ResidueRing::new(f.gen()).expect("IdealRep generator is nonzero");
    let primes: Vec<GaussInt> = factor(f.gen())
        .expect("nonzero")
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    let mut seen: HashSet<GaussInt> = HashSet::new();
    let mut reps = Vec::new();
    for z in ring.residues() {
        if seen.contains(&z) || primes.iter().any(|p| p.divides(&z)) {
            continue;
        }
        if z.is_zero() {
            // only possible for the unit ideal, where 0 ≡ 1
            reps.push(IdealRep::new(GaussInt::one()).expect("nonzero"));
            break;
        }
        for k in 0..4 {
            seen.insert(ring.reduce(&z.mul_i_pow(k)));
        }
        reps.push(IdealRep::new(z).expect("nonzero residue"));
    }
    reps
}

/// Like [`ray_class_reps`] but returning the residue representatives
/// themselves (before first-quadrant normalization).
pub fn ray_class_residues(f: &IdealRep) -> Vec<GaussInt> {
    ray_class_reps(f)
        .into_iter()
        .map(|r| r.gen().clone())
        .collect()
}
