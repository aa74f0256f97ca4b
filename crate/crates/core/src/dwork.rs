//! Dwork's exponential `E_gamma(X) = exp(gamma X - gamma X^p)` and the Kummer
//! generators `x_eps` built from it.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::zp::{teichmuller_zp, vp, ZpInt};
use crate::padic::{pow_padic, Level, PadicElem, Tower, Val};

/// Truncated coefficients `e_0, ..., e_T` of `E_gamma`, each stored in the
/// basis `1, gamma, ..., gamma^{p-2}` of `Q_p(gamma)` with exact rational
/// coordinates.
#[derive(Clone, Debug)]
pub struct DworkSeries {
    p: u32,
    target: i64,
    coeffs: Vec<Vec<BigRational>>,
    ords: Vec<Option<Val>>,
}

fn vp_ratio(q: &BigRational, p: u32) -> Option<i64> {
    let n = vp(q.numer(), p)?;
    Some(n - vp(q.denom(), p).expect("nonzero denominator"))
}

impl DworkSeries {
    /// Coefficients needed so that every omitted term has `ord_p > n` on
    /// inputs of valuation `>= 0`: `T = ceil(n p^2 / (p - 1)) + p^2`.
    pub fn new(p: u32, n: i64) -> Result<Self> {
        crate::padic::zp::require_odd_prime(p)?;
        let pi = p as i64;
        let t = (n * pi * pi + pi - 2) / (pi - 1) + pi * pi;
        let t = t.max(1) as usize;
        let mut fact = vec![BigInt::one()];
        for i in 1..=t {
            let next = &fact[i - 1] * BigInt::from(i);
            fact.push(next);
        }
        let r = p as usize - 1;
        let mut coeffs = Vec::with_capacity(t + 1);
        let mut ords = Vec::with_capacity(t + 1);
        for nn in 0..=t {
            let mut q = vec![BigRational::zero(); r];
            let mut m = 0usize;
            while p as usize * m <= nn {
                // (-1)^m gamma^{n - (p-1) m} / ((n - p m)! m!)
                let e = nn - r * m;
                let (slot, k) = (e % r, e / r);
                let mut num = BigInt::from(-(pi)).pow(k as u32);
                if m % 2 == 1 {
                    num = -num;
                }
                let den = &fact[nn - p as usize * m] * &fact[m];
                q[slot] += BigRational::new(num, den);
                m += 1;
            }
            let ord = q
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(s, c)| Val::from(vp_ratio(c, p).unwrap()) + Val::new(s as i64, r as i64))
                .min();
            if let Some(o) = ord {
                let bound = Val::new(nn as i64 * (pi - 1), pi * pi);
                if o < bound {
                    return Err(Error::CheckFailed(format!(
                        "ord(e_{nn}) = {o} is below {bound}"
                    )));
                }
            }
            coeffs.push(q);
            ords.push(ord);
        }
        Ok(DworkSeries { p, target: n, coeffs, ords })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn target(&self) -> i64 {
        self.target
    }

    /// Index of the last stored coefficient.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coordinates of `e_n` over `1, gamma, ..., gamma^{p-2}`.
    pub fn coeff(&self, n: usize) -> &[BigRational] {
        &self.coeffs[n]
    }

    /// `ord_p(e_n)`, `None` when `e_n = 0`.
    pub fn ord(&self, n: usize) -> Option<Val> {
        self.ords[n]
    }

    /// `e_n` as an element of `K'`.
    pub fn coeff_elem(&self, tower: &Arc<Tower>, n: usize) -> Result<PadicElem> {
        let mut acc = PadicElem::zero(tower, Level::Kprime);
        let g = PadicElem::gamma(tower);
        let mut gp = PadicElem::one(tower, Level::Kprime);
        for q in &self.coeffs[n] {
            if !q.is_zero() {
                let c = PadicElem::from_ratio(tower, Level::Kprime, q.numer(), q.denom())?;
                acc = &acc + &(&c * &gp);
            }
            gp = &gp * &g;
        }
        Ok(acc)
    }

    /// `E_gamma(u)` for `u` in `K'` with `v(u) >= 0`, by Horner's rule.
    pub fn eval(&self, u: &PadicElem) -> Result<PadicElem> {
        if u.p() != self.p {
            return Err(Error::PrimeMismatch { left: self.p, right: u.p() });
        }
        if u.valuation() < Val::zero() {
            return Err(Error::InvalidArgument(format!("v(u) = {} < 0", u.valuation())));
        }
        let tower = u.tower();
        let u = u.embed(Level::Kprime)?;
        let mut acc = self.coeff_elem(tower, self.truncation())?;
        for n in (0..self.truncation()).rev() {
            acc = &(&acc * &u) + &self.coeff_elem(tower, n)?;
        }
        // omitted terms have ord > target
        Ok(acc.with_prec_at_most(self.target.max(0) + 1))
    }
}

pub fn dwork_coeffs(p: u32, n: i64) -> Result<DworkSeries> {
    DworkSeries::new(p, n)
}

pub fn dwork_eval(s: &DworkSeries, u: &PadicElem) -> Result<PadicElem> {
    s.eval(u)
}

/// `zeta = E_gamma(1)`, checked to be a primitive `p`-th root of unity.
pub fn zeta_of_gamma(s: &DworkSeries, tower: &Arc<Tower>) -> Result<PadicElem> {
    let one = PadicElem::one(tower, Level::Kprime);
    let zeta = s.eval(&one)?;
    let need = Val::from(s.target().min(tower.cap()) - 1);
    if zeta.pow(s.p() as u64).agreement(&one)? < need {
        return Err(Error::PrecisionLoss("E_gamma(1)^p != 1".into()));
    }
    if (&zeta - &one).valuation() != Val::new(1, s.p() as i64 - 1) {
        return Err(Error::CheckFailed("E_gamma(1) is not a primitive p-th root".into()));
    }
    Ok(zeta)
}

/// Teichmuller representatives `{0} u mu_{p-1}` of the normal-basis
/// coordinates of `eps`.
pub fn teichmuller_coords(p: u32, u: &[u64], digits: i64) -> Result<Vec<Option<ZpInt>>> {
    u.iter()
        .map(|&c| if c == 0 { Ok(None) } else { teichmuller_zp(p, c as i64, digits).map(Some) })
        .collect()
}

/// Conjugates `eta^{p^j}`, `j = 0..d-1`.
pub fn eta_conjugates(eta: &PadicElem) -> Result<Vec<PadicElem>> {
    let d = eta.tower().degree();
    let mut out = vec![eta.clone()];
    for _ in 1..d {
        let next = out.last().unwrap().frobenius()?;
        out.push(next);
    }
    Ok(out)
}

/// `x_eps = prod_j E_gamma(u_j eta^{p^j})` for `eps = sum_j u_j eta^{p^j}`
/// given by its normal-basis coordinates `u`.
pub fn x_of_eps(s: &DworkSeries, eta: &PadicElem, u: &[u64]) -> Result<PadicElem> {
    let tower = eta.tower();
    if u.iter().all(|&c| c % s.p() as u64 == 0) {
        return Err(Error::ZeroResidue);
    }
    let lifts = teichmuller_coords(s.p(), u, tower.cap() + 4)?;
    let conj = eta_conjugates(eta)?;
    let mut x = PadicElem::one(tower, Level::Kprime);
    for (lift, e) in lifts.iter().zip(&conj) {
        if let Some(l) = lift {
            let arg = &PadicElem::from_bigint(tower, Level::K, &l.value) * e;
            x = &x * &s.eval(&arg)?;
        }
    }
    Ok(x)
}

/// The other product form `prod_j E_gamma(eta^{p^j})^{u_j}`, exponents
/// taken as Teichmuller representatives in `Z_p`.
pub fn x_of_eps_power_form(s: &DworkSeries, eta: &PadicElem, u: &[u64]) -> Result<PadicElem> {
    let tower = eta.tower();
    let lifts = teichmuller_coords(s.p(), u, tower.cap() + 8)?;
    let conj = eta_conjugates(eta)?;
    let mut x = PadicElem::one(tower, Level::Kprime);
    for (lift, e) in lifts.iter().zip(&conj) {
        if let Some(l) = lift {
            x = &x * &pow_padic(&s.eval(e)?, l)?;
        }
    }
    Ok(x)
}

/// `exp(z) = sum z^n / n!` for `v(z) > 1/(p-1)`.
pub fn exp_series(z: &PadicElem) -> Result<PadicElem> {
    let p = z.p() as i64;
    let v = z.valuation();
    if v <= Val::new(1, p - 1) {
        return Err(Error::Divergent(v.to_string()));
    }
    let tower = z.tower();
    let mut acc = PadicElem::one(tower, z.level());
    let mut term = acc.clone();
    let mut n = 0i64;
    let target = z.prec();
    loop {
        n += 1;
        term = &term * z;
        let inv = PadicElem::from_ratio(tower, Level::Qp, &BigInt::one(), &BigInt::from(n))?;
        term = &term * &inv;
        acc = &acc + &term;
        // v(z^m/m!) >= m (v - 1/(p-1)) bounds every later term
        if Val::from(n + 1) * (v - Val::new(1, p - 1)) >= Val::from(target) {
            break;
        }
    }
    Ok(acc)
}

/// Signs of the stored coefficients, for reporting.
pub fn leading_terms(s: &DworkSeries, count: usize) -> Vec<String> {
    (0..count.min(s.truncation() + 1))
        .map(|n| {
            let terms: Vec<String> = s
                .coeff(n)
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(r, c)| {
                    let sign = if c.is_negative() { "-" } else { "" };
                    format!("{sign}{}*g^{r}", c.abs())
                })
                .collect();
            if terms.is_empty() { "0".into() } else { terms.join(" + ") }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(p: u32, d: usize) -> (Arc<Tower>, PadicElem, DworkSeries) {
        let (t, eta) = Tower::unramified(p, d, 12, 3).unwrap();
        let s = DworkSeries::new(p, 12).unwrap();
        (t, eta, s)
    }

    #[test]
    fn first_coefficients() {
        for p in [3u32, 5, 7] {
            let s = DworkSeries::new(p, 8).unwrap();
            let one = BigRational::one();
            assert_eq!(s.coeff(0)[0], one);
            assert!(s.coeff(0)[1..].iter().all(Zero::is_zero));
            // e_1 = gamma; e_2 = gamma^2 / 2 (which is -p/2 when p = 3)
            assert_eq!(s.coeff(1)[1], one);
            if p == 3 {
                assert_eq!(s.coeff(2)[0], BigRational::new((-3).into(), 2.into()));
            } else {
                assert_eq!(s.coeff(2)[2], BigRational::new(1.into(), 2.into()));
            }
        }
    }

    #[test]
    fn valuation_bound_holds() {
        let s = DworkSeries::new(3, 8).unwrap();
        for n in 0..=s.truncation() {
            if let Some(o) = s.ord(n) {
                assert!(o >= Val::new(2 * n as i64, 9), "n = {n}");
            }
        }
        assert!(s.truncation() >= 36);
    }

    #[test]
    fn eval_at_zero_and_zeta() {
        let (t, _, s) = setup(3, 1);
        let zero = PadicElem::zero(&t, Level::Kprime);
        let e0 = s.eval(&zero).unwrap();
        assert!(e0.agreement(&PadicElem::one(&t, Level::Kprime)).unwrap() >= Val::from(12));
        let zeta = zeta_of_gamma(&s, &t).unwrap();
        let g = PadicElem::gamma(&t);
        let one = PadicElem::one(&t, Level::Kprime);
        // zeta = 1 + gamma mod gamma^2
        assert!((&(&zeta - &one) - &g).valuation() >= Val::new(2, 2));
        let sum = &(&one + &zeta) + &zeta.pow(2);
        assert!(sum.valuation() >= Val::from(11));
    }

    #[test]
    fn kummer_generator_for_trivial_eps_is_zeta() {
        let (t, eta, s) = setup(3, 1);
        // with eta = teichmuller(1) the class eps = 1 gives x = zeta
        if eta.residue().unwrap() == vec![1] {
            let x = x_of_eps(&s, &eta, &[1]).unwrap();
            let zeta = zeta_of_gamma(&s, &t).unwrap();
            assert!(x.agreement(&zeta).unwrap() >= Val::from(11));
        }
        let x = x_of_eps(&s, &eta, &[1]).unwrap();
        let one = PadicElem::one(&t, Level::Kprime);
        assert_eq!((&x - &one).valuation(), Val::new(1, 2));
        assert!(matches!(x_of_eps(&s, &eta, &[0]), Err(Error::ZeroResidue)));
    }

    #[test]
    fn product_forms_agree() {
        let (_, eta, s) = setup(3, 2);
        for u in [[1u64, 0], [1, 2], [0, 1], [1, 1]] {
            let a = x_of_eps(&s, &eta, &u).unwrap();
            let b = x_of_eps_power_form(&s, &eta, &u).unwrap();
            assert!(a.agreement(&b).unwrap() >= Val::from(10), "u = {u:?}");
        }
    }

    #[test]
    fn p_th_power_identity() {
        // E(a)^p = exp(p gamma a) exp(-p gamma a^p)
        let (t, eta, s) = setup(5, 1);
        let g = PadicElem::gamma(&t);
        let a = &eta.embed(Level::Kprime).unwrap() + &PadicElem::from_int(&t, Level::Kprime, 2);
        let lhs = s.eval(&a).unwrap().pow(5);
        let pg = g.mul_p_pow(1);
        let rhs = &exp_series(&(&pg * &a)).unwrap() * &exp_series(&-&(&pg * &a.pow(5))).unwrap();
        assert!(lhs.agreement(&rhs).unwrap() >= Val::from(10));
    }
}
