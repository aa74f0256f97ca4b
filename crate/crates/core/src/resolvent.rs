//! Resolvents `(alpha_M | chi^j)` and the norm-resolvent exponents.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::extension::WeakExtension;
use crate::padic::zp::{inv_mod, mu_generator, ZpInt};
use crate::padic::{pow_padic, trace_norm, FieldPair, Level, PadicElem, TraceOrNorm, Val};

/// `xi^e` for a primitive `p^2`-th root of unity `xi`; `e` is kept mod `p^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnityExponent {
    pub p: u32,
    pub e: i64,
}

impl RootOfUnityExponent {
    pub fn new(p: u32, e: i64) -> Self {
        let m = (p as i64) * (p as i64);
        RootOfUnityExponent { p, e: e.rem_euclid(m) }
    }

    pub fn add(self, other: Self) -> Self {
        assert_eq!(self.p, other.p);
        Self::new(self.p, self.e + other.e)
    }

    pub fn neg(self) -> Self {
        Self::new(self.p, -self.e)
    }

    pub fn is_one(self) -> bool {
        self.e == 0
    }
}

impl fmt::Display for RootOfUnityExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi^{}", self.e)
    }
}

/// `(s, mu^s mod p^2)` with `mu^s = j mod p`, after asserting
/// `mu^s = j (2 - j^{1-p}) mod p^2`.
pub fn mu_s_of_j(p: u32, j: u32) -> Result<(u32, i64)> {
    if j % p == 0 {
        return Err(Error::InvalidArgument("mu_s_of_j needs j != 0 mod p".into()));
    }
    let m2 = (p as i64) * (p as i64);
    let mu = mu_generator(p, 2).value.to_i64().unwrap();
    let mut acc = 1i64;
    for s in 0..p - 1 {
        if acc % p as i64 == (j % p) as i64 {
            let jj = BigInt::from(j);
            let m = BigInt::from(m2);
            let jp1 = jj.modpow(&BigInt::from(p - 1), &m);
            let inv = inv_mod(&jp1, &m)?.to_i64().unwrap();
            let rhs = ((j as i64) * (2 - inv)).rem_euclid(m2);
            if rhs != acc {
                return Err(Error::CheckFailed(format!("mu^{s} = {acc} but j(2 - j^(1-p)) = {rhs} mod {m2}")));
            }
            return Ok((s, acc));
        }
        acc = (acc * mu).rem_euclid(m2);
    }
    unreachable!("mu generates (Z/p)^x")
}

/// `sum_t h^t(alpha) zeta^{-j t}`.
pub fn resolvent(w: &WeakExtension, j: u32) -> Result<PadicElem> {
    let p = w.p();
    let orbit = w.h_orbit(w.alpha())?;
    resolvent_of_orbit(w, &orbit, j % p)
}

fn resolvent_of_orbit(w: &WeakExtension, orbit: &[PadicElem], j: u32) -> Result<PadicElem> {
    let p = w.p();
    // zeta^{-j} = zeta^{(p-1) j}
    let step = w.zeta.pow(((p - 1) * j % p) as u64);
    let mut acc = PadicElem::zero(w.tower(), Level::L);
    let mut z = PadicElem::one(w.tower(), Level::Kprime);
    for y in orbit {
        acc = acc.checked_add(&y.checked_mul(&z)?)?;
        z = z.checked_mul(&step)?;
    }
    Ok(acc)
}

/// Comparison of a resolvent with its closed form.
#[derive(Clone, Debug)]
pub struct ResolventCheck {
    pub j: u32,
    pub s: Option<u32>,
    /// Agreement with `delta^s(T)` (or with 1 for `j = 0`).
    pub residual: Val,
    /// Agreement with `T^{mu^s}` computed by the binomial series.
    pub residual_series: Val,
    pub pass: bool,
}

pub fn resolvent_check(w: &WeakExtension, j: u32) -> Result<ResolventCheck> {
    let p = w.p();
    let j = j % p;
    let r = resolvent(w, j)?;
    let tol = Val::from(w.n - 3);
    if j == 0 {
        let one = PadicElem::one(w.tower(), Level::L);
        let residual = r.agreement(&one)?;
        return Ok(ResolventCheck { j, s: None, residual, residual_series: residual, pass: residual >= tol });
    }
    let (s, _) = mu_s_of_j(p, j)?;
    let residual = r.agreement(w.delta_t(s as usize))?;
    let mu_s = w.mu.pow(s as u64);
    let direct = pow_padic(w.t(), &mu_s)?;
    let residual_series = r.agreement(&direct)?;
    let pass = residual >= tol && residual_series >= tol;
    Ok(ResolventCheck { j, s: Some(s), residual, residual_series, pass })
}

/// Recovers `h^t(alpha)` as `(1/p) sum_j zeta^{jt} (alpha | chi^j)`;
/// returns the worst agreement over `t`.
pub fn fourier_inversion(w: &WeakExtension) -> Result<Val> {
    let p = w.p();
    let res: Vec<PadicElem> = (0..p).map(|j| resolvent(w, j)).collect::<Result<_>>()?;
    let orbit = w.h_orbit(w.alpha())?;
    let mut worst = Val::from(i64::MAX / 4);
    for (t, target) in orbit.iter().enumerate() {
        let mut acc = PadicElem::zero(w.tower(), Level::L);
        for (j, r) in res.iter().enumerate() {
            let z = w.zeta.pow(((j * t) % p as usize) as u64);
            acc = acc.checked_add(&r.checked_mul(&z)?)?;
        }
        worst = worst.min(acc.div_p_pow(1).agreement(target)?);
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct NormCheck {
    pub residual: Val,
    pub pass: bool,
}

/// `N_{K'/Q_p(zeta)}(x) = zeta^{Tr(eps)}`, for `x` or a substitute.
pub fn norm_x_check(w: &WeakExtension, x: Option<&PadicElem>) -> Result<NormCheck> {
    let p = w.p();
    let x = x.unwrap_or(&w.x);
    let norm = trace_norm(FieldPair::KprimeOverQpZeta, x, TraceOrNorm::Norm)?;
    let target = w.zeta.pow(w.eps.trace_mod_p as u64 % p as u64);
    let residual = norm.agreement(&target)?;
    Ok(NormCheck { residual, pass: residual >= Val::from(w.n - 2) })
}

/// `e(j) = mu^s Tr(eps) mod p^2` for `j != 0`, `e(0) = 0`; requires the
/// resolvent closed form and the norm identity to have been verified.
pub fn norm_resolvent(
    w: &WeakExtension,
    j: u32,
    resolvent_ok: bool,
    norm_ok: bool,
) -> Result<RootOfUnityExponent> {
    let p = w.p();
    if !(resolvent_ok && norm_ok) {
        return Err(Error::CheckFailed("norm-resolvent preconditions not established".into()));
    }
    if j % p == 0 {
        return Ok(RootOfUnityExponent::new(p, 0));
    }
    let (_, mu_s) = mu_s_of_j(p, j)?;
    Ok(RootOfUnityExponent::new(p, mu_s * w.eps.trace_mod_p2(p)))
}

/// `j (2 - j^{1-p}) mod p^2` computed directly.
pub fn norm_resolvent_formula(p: u32, j: u32, trace_mod_p2: i64) -> RootOfUnityExponent {
    if j % p == 0 {
        return RootOfUnityExponent::new(p, 0);
    }
    let m = BigInt::from((p as i64) * (p as i64));
    let jj = BigInt::from(j);
    let jp1 = jj.modpow(&BigInt::from(p - 1), &m);
    let inv = inv_mod(&jp1, &m).expect("j is a unit");
    let f = (&jj * (BigInt::from(2) - inv)).mod_floor(&m);
    RootOfUnityExponent::new(p, f.to_i64().unwrap() * trace_mod_p2)
}

/// `mu^s` as a `p`-adic integer at the extension's precision.
pub fn mu_pow(w: &WeakExtension, s: u32) -> ZpInt {
    w.mu.pow(s as u64)
}
