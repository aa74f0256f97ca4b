//! Exact arithmetic in `Z[xi]`, `xi` a primitive `p^2`-th root of unity.
//!
//! Elements are stored in the power basis `1, xi, ..., xi^{p(p-1)-1}` after
//! reduction by `Phi_{p^2}(X) = 1 + X^p + X^{2p} + ... + X^{p(p-1)}`. The
//! `p`-th root of unity `zeta` is `xi^p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    p: u32,
    coeffs: Vec<BigInt>,
}

/// `p^2` as a modulus for exponents of `xi`.
fn order(p: u32) -> i64 {
    (p as i64) * (p as i64)
}

fn degree(p: u32) -> usize {
    (p as usize) * (p as usize - 1)
}

impl CycInt {
    pub fn zero(p: u32) -> Self {
        CycInt { p, coeffs: vec![BigInt::zero(); degree(p)] }
    }

    pub fn one(p: u32) -> Self {
        Self::from_int(p, BigInt::one())
    }

    pub fn from_int(p: u32, n: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = n.into();
        z
    }

    /// The reduced representative of `xi^a` (exponent taken mod `p^2`).
    pub fn root(p: u32, a: i64) -> Self {
        Self::monomial(p, BigInt::one(), a)
    }

    /// `zeta^t = xi^{p t}`.
    pub fn zeta_pow(p: u32, t: i64) -> Self {
        Self::root(p, (p as i64) * t)
    }

    fn monomial(p: u32, c: BigInt, a: i64) -> Self {
        let mut raw = vec![BigInt::zero(); order(p) as usize];
        raw[a.rem_euclid(order(p)) as usize] = c;
        Self::reduce_cyclic(p, raw)
    }

    /// Builds an element from arbitrary coefficients of `1, xi, xi^2, ...`.
    pub fn from_coeffs(p: u32, coeffs: &[BigInt]) -> Self {
        let n = order(p) as usize;
        let mut raw = vec![BigInt::zero(); n];
        for (i, c) in coeffs.iter().enumerate() {
            raw[i % n] += c;
        }
        Self::reduce_cyclic(p, raw)
    }

    /// Reduces a vector indexed by exponents mod `p^2`.
    fn reduce_cyclic(p: u32, mut raw: Vec<BigInt>) -> Self {
        let deg = degree(p);
        let pu = p as usize;
        // xi^{p(p-1) + r} = -sum_{i<p-1} xi^{ip + r}
        for r in 0..pu {
            let c = std::mem::take(&mut raw[deg + r]);
            if c.is_zero() {
                continue;
            }
            for i in 0..pu - 1 {
                raw[i * pu + r] -= &c;
            }
        }
        raw.truncate(deg);
        CycInt { p, coeffs: raw }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p, right: other.p });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CycInt { p: self.p, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CycInt { p: self.p, coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = order(self.p) as usize;
        let mut raw = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                raw[(i + j) % n] += a * b;
            }
        }
        Ok(Self::reduce_cyclic(self.p, raw))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CycInt { p: self.p, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact division by a rational integer; fails unless every coefficient
    /// is divisible.
    pub fn div_exact(&self, k: &BigInt) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return Err(Error::InexactDivision(format!("coefficient {c} by {k}")));
            }
            coeffs.push(q);
        }
        Ok(CycInt { p: self.p, coeffs })
    }

    /// The automorphism `xi -> xi^b`; `b = -1` is complex conjugation.
    pub fn galois(&self, b: i64) -> Result<Self> {
        if b.rem_euclid(self.p as i64) == 0 {
            return Err(Error::NotCoprime { b, p: self.p });
        }
        let n = order(self.p);
        let mut raw = vec![BigInt::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                raw[((i as i64) * b).rem_euclid(n) as usize] += c;
            }
        }
        Ok(Self::reduce_cyclic(self.p, raw))
    }

    pub fn conj(&self) -> Self {
        self.galois(-1).expect("-1 is coprime to p")
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = CycInt::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Returns `(sign, e)` with `self = sign * xi^e`, if such a pair exists.
    pub fn as_root_of_unity(&self) -> Option<(i8, i64)> {
        // a signed monomial has exactly one nonzero coefficient of absolute
        // value 1 in the reduced basis, or is minus a sum of p-1 of them
        let n = order(self.p);
        for e in 0..n {
            let r = CycInt::root(self.p, e);
            if &r == self {
                return Some((1, e));
            }
            if -r == *self {
                return Some((-1, e));
            }
        }
        None
    }

    /// `xi^e` exponent of a root of unity, when the sign is `+1`.
    pub fn root_exponent(&self) -> Option<i64> {
        match self.as_root_of_unity() {
            Some((1, e)) => Some(e),
            _ => None,
        }
    }
}

impl Add for &CycInt {
    type Output = CycInt;
    fn add(self, rhs: &CycInt) -> CycInt {
        self.checked_add(rhs).expect("CycInt: prime mismatch")
    }
}

impl Sub for &CycInt {
    type Output = CycInt;
    fn sub(self, rhs: &CycInt) -> CycInt {
        self.checked_sub(rhs).expect("CycInt: prime mismatch")
    }
}

impl Mul for &CycInt {
    type Output = CycInt;
    fn mul(self, rhs: &CycInt) -> CycInt {
        self.checked_mul(rhs).expect("CycInt: prime mismatch")
    }
}

impl Neg for CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt { p: self.p, coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let body = match (i, mag.is_one()) {
                (0, _) => mag.to_string(),
                (_, true) => format!("xi^{i}"),
                _ => format!("{mag}*xi^{i}"),
            };
            if first {
                write!(f, "{sign}{body}")?;
            } else {
                write!(f, " {sign} {body}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
