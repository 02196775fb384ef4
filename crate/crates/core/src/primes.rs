//! Small-prime utilities: deterministic Miller–Rabin for `u64` and prime
//! enumeration for scans.

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic for all `n < 2⁶⁴` (first twelve prime bases).
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes `p ≡ 1 (mod 4)` in the closed interval `[lo, hi]`, ascending.
pub fn split_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&p| p % 4 == 1 && is_prime(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_trial_division() {
        let naive = |n: u64| {
            n >= 2
                && (2..)
                    .take_while(|q| q * q <= n)
                    .all(|q| !n.is_multiple_of(q))
        };
        for n in 0..20_000 {
            assert_eq!(is_prime(n), naive(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn split_prime_listing() {
        assert_eq!(split_primes(5, 41), vec![5, 13, 17, 29, 37, 41]);
        assert!(split_primes(6, 12).is_empty());
    }
}
