//! Rational-integer helpers for `Z_p` computations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A `p`-adic integer known modulo `p^prec`, stored as its least
/// nonnegative residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpInt {
    pub p: u32,
    pub value: BigInt,
    pub prec: i64,
}

impl ZpInt {
    pub fn new(p: u32, value: impl Into<BigInt>, prec: i64) -> Self {
        let m = pow_p(p, prec);
        ZpInt { p, value: value.into().mod_floor(&m), prec }
    }

    pub fn modulo(&self, k: i64) -> BigInt {
        self.value.mod_floor(&pow_p(self.p, k.min(self.prec)))
    }

    pub fn mul(&self, other: &ZpInt) -> ZpInt {
        ZpInt::new(self.p, &self.value * &other.value, self.prec.min(other.prec))
    }

    pub fn pow(&self, e: u64) -> ZpInt {
        let m = pow_p(self.p, self.prec);
        ZpInt { p: self.p, value: self.value.modpow(&BigInt::from(e), &m), prec: self.prec }
    }

    pub fn is_unit(&self) -> bool {
        !(&self.value % self.p).is_zero()
    }
}

pub fn pow_p(p: u32, k: i64) -> BigInt {
    num_traits::pow(BigInt::from(p), k.max(0) as usize)
}

/// `p`-adic valuation of a nonzero integer; `None` for zero.
pub fn vp(n: &BigInt, p: u32) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// Inverse of `a` modulo `m`; `a` must be coprime to `m`.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    let g = a.extended_gcd(m);
    if !g.gcd.abs().is_one() {
        return Err(Error::InexactDivision(format!("{a} is not invertible mod {m}")));
    }
    Ok(g.x.mod_floor(m))
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u32;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

pub fn require_odd_prime(p: u32) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidPrime(p));
    }
    Ok(())
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u32) -> u32 {
    let n = p - 1;
    let mut factors = Vec::new();
    let mut m = n;
    let mut f = 2;
    while f * f <= m {
        if m % f == 0 {
            factors.push(f);
            while m % f == 0 {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (1..p)
        .find(|&g| {
            factors.iter().all(|&q| {
                BigInt::from(g).modpow(&BigInt::from(n / q), &BigInt::from(p)) != BigInt::one()
            })
        })
        .expect("a prime has a primitive root")
}

/// Teichmuller lift in `Z_p` of the residue `a mod p`, to `digits` digits.
pub fn teichmuller_zp(p: u32, a: i64, digits: i64) -> Result<ZpInt> {
    let a = a.rem_euclid(p as i64);
    if a == 0 {
        return Err(Error::ZeroResidue);
    }
    let m = pow_p(p, digits);
    let pe = BigInt::from(p);
    let mut t = BigInt::from(a);
    // each p-th power fixes one more digit
    for _ in 0..digits {
        t = t.modpow(&pe, &m);
    }
    Ok(ZpInt { p, value: t, prec: digits })
}

/// The fixed primitive `(p-1)`-th root of unity of `Z_p`: the Teichmuller
/// lift of the smallest primitive root mod `p`.
pub fn mu_generator(p: u32, digits: i64) -> ZpInt {
    teichmuller_zp(p, primitive_root(p) as i64, digits).expect("primitive root is nonzero")
}

pub fn factorial_vp(n: u64, p: u32) -> i64 {
    let mut v = 0i64;
    let mut q = p as u64;
    while q <= n {
        v += (n / q) as i64;
        q *= p as u64;
    }
    v
}

pub fn to_i64(n: &BigInt) -> i64 {
    n.to_i64().expect("value fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teichmuller_roots_of_unity() {
        let t = teichmuller_zp(5, 2, 10).unwrap();
        let m = pow_p(5, 10);
        assert_eq!(t.value.modpow(&BigInt::from(4), &m), BigInt::one());
        assert_eq!(&t.value % 5, BigInt::from(2));
        // its square is -1 mod 25
        assert_eq!(t.value.modpow(&BigInt::from(2), &BigInt::from(25)), BigInt::from(24));
        assert_eq!(teichmuller_zp(3, 2, 6).unwrap().value, pow_p(3, 6) - 1);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(3), 2);
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(13), 2);
    }

    #[test]
    fn valuations() {
        assert_eq!(vp(&BigInt::from(75), 5), Some(2));
        assert_eq!(vp(&BigInt::from(0), 5), None);
        assert_eq!(factorial_vp(25, 5), 6);
    }
}
