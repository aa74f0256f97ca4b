//! Teichmuller lifts, Frobenius, traces and norms, inverses and the
//! binomial-series power map.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::zp::ZpInt;
use super::{frob_apply, Level, PadicElem, Tower, Val};
use crate::error::{Error, Result};

/// Teichmuller lift in `K` of a nonzero residue (power basis of `k`).
pub fn teichmuller(tower: &Arc<Tower>, residue: &[u64]) -> Result<PadicElem> {
    let k = tower.residue_field();
    if k.is_zero(residue) {
        return Err(Error::ZeroResidue);
    }
    let coords: Vec<BigInt> = residue.iter().map(|&c| BigInt::from(c)).collect();
    let mut a = PadicElem::exact(tower, Level::K, coords);
    // each q-th power fixes one more digit
    let q = k.size();
    for _ in 0..tower.cap() {
        a = a.pow(q);
    }
    Ok(PadicElem::build(tower, Level::K, a.shift, a.shift + tower.cap(), a.coords))
}

impl PadicElem {
    /// The Frobenius automorphism on `K`, extended to `K'` by fixing `gamma`.
    pub fn frobenius(&self) -> Result<PadicElem> {
        if self.level == Level::L {
            return Err(Error::WrongLevel { op: "frobenius", level: "L" });
        }
        let base = &self.tower.base;
        let d = base.d;
        let r = (self.prec - self.shift).clamp(0, base.cap);
        let m = base.ppow(r);
        let mut out = Vec::with_capacity(self.coords.len());
        if self.level == Level::Qp {
            out.extend(self.coords.iter().cloned());
        } else {
            for blk in self.coords.chunks(d) {
                out.extend(frob_apply(base.frob_images(), blk, &m));
            }
        }
        Ok(PadicElem::build(&self.tower, self.level, self.shift, self.prec, out))
    }

    /// Inverse of a nonzero element of `K` (Newton iteration on the unit
    /// part).
    pub fn inverse_k(&self) -> Result<PadicElem> {
        let a = self.to_level(Level::K)?;
        if a.is_zero() {
            return Err(Error::InexactDivision("inverse of zero".into()));
        }
        let rel = a.prec - a.shift;
        let unit = PadicElem::build(&a.tower, Level::K, 0, rel, a.coords.clone());
        let k = a.tower.residue_field();
        let res = unit.residue()?;
        let inv_bar = k.inv(&res).ok_or(Error::ZeroResidue)?;
        let coords: Vec<BigInt> = inv_bar.iter().map(|&c| BigInt::from(c)).collect();
        let mut y = PadicElem::build(&a.tower, Level::K, 0, 1, coords);
        let two = PadicElem::from_int(&a.tower, Level::K, 2);
        let mut have = 1;
        while have < rel {
            have = (2 * have).min(rel);
            let y_ext = PadicElem::build(&a.tower, Level::K, y.shift, have, y.coords.clone());
            let t = &two - &(&unit * &y_ext);
            y = &y_ext * &t;
            y = PadicElem::build(&a.tower, Level::K, y.shift, have, y.coords);
        }
        let y = PadicElem::build(&a.tower, Level::K, 0, rel, y.coords);
        Ok(y.mul_p_pow(-a.shift))
    }

    /// Coordinate block of the `K'` coefficient of `Pi^i` in an `L` element.
    pub fn pi_coeff(&self, i: usize) -> PadicElem {
        let w = Level::Kprime.dim(self.p(), self.tower.degree());
        let n = self.coords.len();
        let mut c = vec![BigInt::zero(); w];
        if i * w < n {
            c.clone_from_slice(&self.coords[i * w..(i + 1) * w]);
        }
        PadicElem::build(&self.tower, Level::Kprime, self.shift, self.prec, c)
    }

    /// Coordinate block of the `K` coefficient of `gamma^j` in a `K'`
    /// element.
    pub fn gamma_coeff(&self, j: usize) -> PadicElem {
        let d = self.tower.degree();
        let mut c = vec![BigInt::zero(); d];
        if (j + 1) * d <= self.coords.len() {
            c.clone_from_slice(&self.coords[j * d..(j + 1) * d]);
        }
        PadicElem::build(&self.tower, Level::K, self.shift, self.prec, c)
    }

    /// Applies the `K'`-semilinear map determined by `on_kprime` on
    /// coefficients and `pi_images[i]` = image of `Pi^i`.
    pub fn apply_l_auto<F>(&self, on_kprime: F, pi_images: &[PadicElem]) -> PadicElem
    where
        F: Fn(&PadicElem) -> PadicElem,
    {
        let p = self.p() as usize;
        if self.level < Level::L {
            let low = self.to_level(Level::Kprime).expect("below L");
            return on_kprime(&low).embed_in(&self.tower, Level::L);
        }
        let mut acc = PadicElem::zero(&self.tower, Level::L);
        for (i, img) in pi_images.iter().enumerate().take(p) {
            let c = self.pi_coeff(i);
            if !c.is_zero() {
                acc = &acc + &(&on_kprime(&c) * img);
            }
        }
        acc.with_prec_at_most(self.prec)
    }

    /// The `K'`-automorphism `T -> zeta^t T` of `L`.
    pub fn h_tilde(&self, t: u32) -> Result<PadicElem> {
        let pows = self.tower.h_pows()?;
        let mut a = self.clone();
        for _ in 0..(t % self.p()) {
            a = a.apply_l_auto(|c| c.clone(), pows);
        }
        Ok(a)
    }

    /// `K'`-scaling of the `gamma^j` blocks by `mu^j`: the automorphism
    /// `gamma -> mu gamma` of `K'` fixing `K`.
    pub fn gamma_twist(&self, mu: &PadicElem) -> Result<PadicElem> {
        let a = self.to_level(Level::Kprime)?;
        let n = self.p() as usize - 1;
        let mut acc = PadicElem::zero(&a.tower, Level::Kprime);
        let mut mu_j = PadicElem::one(&a.tower, Level::Qp);
        let g = PadicElem::gamma(&a.tower);
        let mut g_j = PadicElem::one(&a.tower, Level::Kprime);
        for j in 0..n {
            let c = a.gamma_coeff(j);
            if !c.is_zero() {
                acc = &acc + &(&(&c * &mu_j) * &g_j);
            }
            mu_j = &mu_j * mu;
            g_j = &g_j * &g;
        }
        Ok(acc.with_prec_at_most(a.prec))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldPair {
    /// `K / Q_p`, via the Frobenius orbit.
    KOverQp,
    /// `K' / Q_p(zeta)`, via Frobenius on the `K` coefficients.
    KprimeOverQpZeta,
    /// `L / K'`, via `T -> zeta T`.
    LOverKprime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOrNorm {
    Trace,
    Norm,
}

/// Trace or norm for one of the supported pairs; the result is checked to
/// lie in the lower field.
pub fn trace_norm(pair: FieldPair, a: &PadicElem, which: TraceOrNorm) -> Result<PadicElem> {
    match pair {
        FieldPair::KOverQp | FieldPair::KprimeOverQpZeta => {
            let (upper, lower) = match pair {
                FieldPair::KOverQp => (Level::K, Level::Qp),
                _ => (Level::Kprime, Level::Kprime),
            };
            let a = a.to_level(upper)?;
            let d = a.tower.degree();
            let mut acc = match which {
                TraceOrNorm::Trace => PadicElem::zero(&a.tower, upper),
                TraceOrNorm::Norm => PadicElem::one(&a.tower, upper),
            };
            let mut c = a.clone();
            for _ in 0..d {
                acc = match which {
                    TraceOrNorm::Trace => &acc + &c,
                    TraceOrNorm::Norm => &acc * &c,
                };
                c = c.frobenius()?;
            }
            if pair == FieldPair::KOverQp {
                return acc.to_level(lower);
            }
            // membership in Q_p(gamma): every K block is a constant
            for j in 0..a.p() as usize - 1 {
                let blk = acc.gamma_coeff(j);
                if blk.coords[1..].iter().any(|x| !x.is_zero()) {
                    return Err(Error::NotInSubfield { field: "Q_p(zeta)", precision: acc.prec });
                }
            }
            Ok(acc)
        }
        FieldPair::LOverKprime => {
            let a = a.embed(Level::L)?;
            match which {
                TraceOrNorm::Trace => Ok(trace_l_kprime(&a)),
                TraceOrNorm::Norm => {
                    let mut acc = a.clone();
                    let mut c = a.clone();
                    for _ in 1..a.p() {
                        c = c.h_tilde(1)?;
                        acc = &acc * &c;
                    }
                    acc.to_level(Level::Kprime)
                }
            }
        }
    }
}

/// `Tr_{L/K'}(sum a_i Pi^i) = p sum (-1)^i a_i`.
fn trace_l_kprime(a: &PadicElem) -> PadicElem {
    let mut acc = PadicElem::zero(&a.tower, Level::Kprime);
    for i in 0..a.p() as usize {
        let c = a.pi_coeff(i);
        acc = if i % 2 == 0 { &acc + &c } else { &acc - &c };
    }
    acc.mul_p_pow(1)
}

/// Absolute trace `Tr_{K/Q_p}` through the precomputed traces of `theta^k`.
pub(crate) fn trace_k_fast(a: &PadicElem) -> Result<PadicElem> {
    let a = a.to_level(Level::K)?;
    let mut acc = BigInt::zero();
    for (c, t) in a.coords.iter().zip(a.tower.base.theta_traces()) {
        acc += c * t;
    }
    Ok(PadicElem::build(&a.tower, Level::Qp, a.shift, a.prec, vec![acc]))
}

/// `a^mu` for a `p`-adic integer `mu` and `v(a - 1) > 0`, via the binomial
/// series `(1 + b)^c` after raising `a` to a `p`-power that makes the
/// series converge quickly.
pub fn pow_padic(a: &PadicElem, mu: &ZpInt) -> Result<PadicElem> {
    let one = PadicElem::one(&a.tower, a.level);
    let v0 = (a - &one).valuation();
    if v0 <= Val::zero() {
        return Err(Error::Divergent(v0.to_string()));
    }
    if mu.p != a.p() {
        return Err(Error::PrimeMismatch { left: a.p(), right: mu.p });
    }
    let p = a.p();
    let mut b = a.clone();
    let mut k = 0i64;
    while (&b - &one).valuation() < Val::one() {
        b = b.pow(p as u64);
        k += 1;
    }
    let pk = a.tower.base.ppow(k);
    let (c, m) = mu.value.div_rem(&pk);
    let c_prec = mu.prec - k;
    let head = a.pow_big(&m);
    let beta = &b - &one;
    let vb = beta.valuation();
    // (1+beta)^{p^r} - 1 has valuation r + v(beta) since v(beta) >= 1
    let bound = (Val::from(c_prec) + vb).floor().to_integer();
    let target = bound.min(beta.prec);
    let mut sum = one.clone();
    let mut binom = BigInt::one();
    let mut bpow = one.clone();
    let mut n = 0u64;
    loop {
        n += 1;
        bpow = &bpow * &beta;
        if bpow.valuation() >= Val::from(target) {
            break;
        }
        binom = binom * (&c - BigInt::from(n - 1)) / BigInt::from(n);
        if binom.is_zero() {
            break;
        }
        sum = &sum + &bpow.scale(&binom);
    }
    let sum = sum.with_prec_at_most(target);
    Ok((&head * &sum).with_prec_at_most(bound + head.valuation().floor().to_integer()))
}
