use std::fmt;

use rug::Integer;

use crate::gaussint::GaussInt;
use crate::mpcomplex::BigComplex;

/// `(1/denom)·Σ coeffs[j]·Xʲ` with Gaussian-integer coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct ZiPoly {
    pub coeffs: Vec<GaussInt>,
    pub denom: Integer,
}

impl ZiPoly {
    pub fn new(coeffs: Vec<GaussInt>, denom: Integer) -> Self {
        assert!(denom > 0, "ZiPoly denominator must be positive");
        let mut p = ZiPoly { coeffs, denom };
        p.trim();
        p
    }

    pub fn integral(coeffs: Vec<GaussInt>) -> Self {
        ZiPoly::new(coeffs, Integer::from(1))
    }

    pub fn zero() -> Self {
        ZiPoly::integral(Vec::new())
    }

    /// A polynomial with integer coefficients, e.g. `B_n(X)`.
    pub fn from_integers(coeffs: &[Integer]) -> Self {
        ZiPoly::integral(
            coeffs
                .iter()
                .map(|c| GaussInt::from_int(c.clone()))
                .collect(),
        )
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(GaussInt::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&GaussInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.denom == 1 && self.leading() == Some(&GaussInt::one())
    }

    pub fn coeff(&self, j: usize) -> GaussInt {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj(&self) -> Self {
        ZiPoly::new(
            self.coeffs.iter().map(GaussInt::conj).collect(),
            self.denom.clone(),
        )
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.mul_int(&Integer::from(j)))
            .collect();
        ZiPoly::new(coeffs, self.denom.clone())
    }

    /// Numerator product; the denominators multiply.
    pub fn mul(&self, other: &ZiPoly) -> ZiPoly {
        if self.is_zero() || other.is_zero() {
            return ZiPoly::zero();
        }
        let mut out = vec![GaussInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] += &(a * b);
            }
        }
        ZiPoly::new(out, Integer::from(&self.denom * &other.denom))
    }

    /// `self − other` over the common denominator `lcm`.
    pub fn sub(&self, other: &ZiPoly) -> ZiPoly {
        let l = self.denom.clone().lcm(&other.denom);
        let sa = Integer::from(l.div_exact_ref(&self.denom));
        let sb = Integer::from(l.div_exact_ref(&other.denom));
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|j| &self.coeff(j).mul_int(&sa) - &other.coeff(j).mul_int(&sb))
            .collect();
        ZiPoly::new(coeffs, l)
    }

    /// Remainder modulo a monic integral polynomial; the denominator is kept.
    pub fn rem_monic(&self, modulus: &ZiPoly) -> ZiPoly {
        assert!(modulus.is_monic(), "modulus must be monic and integral");
        let m = modulus.degree().expect("nonzero modulus");
        let mut r = self.coeffs.clone();
        while r.len() > m {
            let top = r.pop().expect("nonempty");
            if top.is_zero() {
                continue;
            }
            let shift = r.len() - m;
            for (j, g) in modulus.coeffs[..m].iter().enumerate() {
                if !g.is_zero() {
                    r[shift + j] -= &(&top * g);
                }
            }
        }
        ZiPoly::new(r, self.denom.clone())
    }

    /// Divide out the common content of numerators and denominator where it
    /// is a rational integer.
    pub fn reduce_denominator(&mut self) {
        let mut g = self.denom.clone();
        for c in &self.coeffs {
            g.gcd_mut(&c.re);
            g.gcd_mut(&c.im);
            if g == 1 {
                return;
            }
        }
        if g > 1 {
            for c in &mut self.coeffs {
                c.re.div_exact_mut(&g);
                c.im.div_exact_mut(&g);
            }
            self.denom.div_exact_mut(&g);
        }
    }

    /// Horner evaluation at a complex point, denominator applied.
    pub fn eval(&self, x: &BigComplex) -> BigComplex {
        let prec = x.prec();
        let mut acc = BigComplex::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = &acc * x;
            acc = &acc + &BigComplex::from_gauss(prec, c);
        }
        let inv = rug::Float::with_val(prec, 1) / &self.denom;
        acc.mul_real(&inv)
    }

    /// Largest coefficient bit length (numerators).
    pub fn max_coeff_bits(&self) -> u32 {
        self.coeffs
            .iter()
            .map(|c| c.re.significant_bits().max(c.im.significant_bits()))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for ZiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZiPoly(deg {:?}, denom {}, [", self.degree(), self.denom)?;
        for (j, c) in self.coeffs.iter().enumerate().take(6) {
            write!(f, "{}{}", if j > 0 { ", " } else { "" }, c)?;
        }
        if self.coeffs.len() > 6 {
            write!(f, ", …")?;
        }
        write!(f, "])")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[(i64, i64)]) -> ZiPoly {
        ZiPoly::integral(c.iter().map(|&x| GaussInt::from(x)).collect())
    }

    #[test]
    fn remainder_and_product() {
        // (X² + 1)(X − i) + (3X + 2) reduced mod X² + 1
        let g = p(&[(1, 0), (0, 0), (1, 0)]);
        let a = p(&[(0, -1), (1, 0)]);
        let prod = g.mul(&a);
        let f = prod.sub(&p(&[(-2, 0), (-3, 0)]));
        assert_eq!(f.rem_monic(&g), p(&[(2, 0), (3, 0)]));
        assert!(prod.rem_monic(&g).is_zero());
    }

    #[test]
    fn derivative_and_denominator() {
        let mut q = ZiPoly::new(
            vec![GaussInt::from(4), GaussInt::from((6, 2))],
            Integer::from(8),
        );
        q.reduce_denominator();
        assert_eq!(q.denom, 4);
        assert_eq!(q.coeffs, vec![GaussInt::from(2), GaussInt::from((3, 1))]);
        let d = p(&[(5, 0), (1, 1), (0, 3)]).derivative();
        assert_eq!(d, p(&[(1, 1), (0, 6)]));
        assert_eq!(ZiPoly::zero().degree(), None);
    }
}
