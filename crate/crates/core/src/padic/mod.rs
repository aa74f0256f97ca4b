//! Precision-tracked arithmetic in the fixed tower `Q_p < K < K' < L`.
//!
//! * `K = Z_p[theta]/f` is unramified of degree `d`, `theta` a Teichmuller
//!   lift of a normal basis generator of the residue field.
//! * `K' = K[gamma]/(gamma^{p-1} + p)`.
//! * `L = K'[T]/(T^p - x)`, stored in the variable `Pi = T - 1`.
//!
//! Elements are coordinate vectors in the integral basis
//! `Pi^i gamma^j theta^k` times a power of `p`. Lower levels are prefixes of
//! the `L` coordinate vector, so embedding is zero extension.

pub mod field;
pub(crate) mod kernel;
mod ops;
pub mod zp;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use field::{fp_poly, ResidueField};
use kernel::{mul_k, mul_kp, mul_l, reduce_all, LRelation};
use zp::{pow_p, require_odd_prime, vp};

pub use ops::{pow_padic, teichmuller, trace_norm, FieldPair, TraceOrNorm};
pub(crate) use ops::trace_k_fast;

/// Valuations, normalized so that `v(p) = 1`.
pub type Val = Ratio<i64>;

/// Precision marker for exact zeros.
const ZERO_PREC: i64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Qp,
    K,
    Kprime,
    L,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Qp => "Q_p",
            Level::K => "K",
            Level::Kprime => "K'",
            Level::L => "L",
        }
    }

    /// Number of `Z_p` coordinates at this level.
    pub fn dim(self, p: u32, d: usize) -> usize {
        match self {
            Level::Qp => 1,
            Level::K => d,
            Level::Kprime => (p as usize - 1) * d,
            Level::L => p as usize * (p as usize - 1) * d,
        }
    }
}

/// Defining data of one level over the level below it.
#[derive(Clone, Debug)]
pub enum DefiningPoly {
    Base,
    /// Monic polynomial over `Z_p`, little endian.
    Unramified(Vec<BigInt>),
    /// `X^{p-1} + p`.
    Eisenstein,
    /// `T^p - x`.
    Kummer(PadicElem),
}

/// Immutable description of a tower level.
#[derive(Clone, Debug)]
pub struct TowerDesc {
    pub level: Level,
    pub p: u32,
    pub d: usize,
    pub defining: DefiningPoly,
    /// Ramification index over the level below.
    pub ramification: u32,
    /// Residue degree over the level below.
    pub residue_degree: usize,
}

#[derive(Debug)]
pub struct BaseField {
    p: u32,
    d: usize,
    cap: i64,
    seed: u64,
    f: Vec<BigInt>,
    /// `frob[k]` = coordinates of `theta^{p k}`.
    frob: Vec<Vec<BigInt>>,
    /// `Tr_{K/Q_p}(theta^k)`.
    traces: Vec<BigInt>,
    residue: ResidueField,
    pows: Vec<BigInt>,
}

impl BaseField {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Relative precision cap in `p`-digits.
    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.residue
    }

    /// The defining polynomial of `K`, known mod `p^cap`.
    pub fn polynomial(&self) -> &[BigInt] {
        &self.f
    }

    pub(crate) fn ppow(&self, k: i64) -> BigInt {
        let k = k.max(0);
        match self.pows.get(k as usize) {
            Some(x) => x.clone(),
            None => pow_p(self.p, k),
        }
    }

    fn ppow_ref(&self, k: i64) -> std::borrow::Cow<'_, BigInt> {
        match self.pows.get(k.max(0) as usize) {
            Some(x) => std::borrow::Cow::Borrowed(x),
            None => std::borrow::Cow::Owned(pow_p(self.p, k)),
        }
    }

    pub(crate) fn frob_images(&self) -> &[Vec<BigInt>] {
        &self.frob
    }

    pub(crate) fn theta_traces(&self) -> &[BigInt] {
        &self.traces
    }
}

#[derive(Debug)]
pub struct Kummer {
    x: PadicElem,
    zeta: PadicElem,
    x_minus_1: Vec<BigInt>,
    binom: Vec<BigInt>,
    /// Powers `h(Pi)^i`, `h(T) = zeta T`.
    h_pows: OnceLock<Vec<PadicElem>>,
}

/// The tower through `K'` (base) or through `L` (with Kummer data).
#[derive(Debug)]
pub struct Tower {
    base: Arc<BaseField>,
    kummer: Option<Kummer>,
}

impl Tower {
    pub fn p(&self) -> u32 {
        self.base.p
    }

    pub fn degree(&self) -> usize {
        self.base.d
    }

    pub fn cap(&self) -> i64 {
        self.base.cap
    }

    pub fn base(&self) -> &Arc<BaseField> {
        &self.base
    }

    pub fn has_kummer(&self) -> bool {
        self.kummer.is_some()
    }

    pub fn x(&self) -> Option<&PadicElem> {
        self.kummer.as_ref().map(|k| &k.x)
    }

    pub fn zeta(&self) -> Option<&PadicElem> {
        self.kummer.as_ref().map(|k| &k.zeta)
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.base.residue
    }

    pub fn desc(&self, level: Level) -> Result<TowerDesc> {
        let (p, d) = (self.p(), self.degree());
        let (defining, e, f) = match level {
            Level::Qp => (DefiningPoly::Base, 1, 1),
            Level::K => (DefiningPoly::Unramified(self.base.f.clone()), 1, d),
            Level::Kprime => (DefiningPoly::Eisenstein, p - 1, 1),
            Level::L => match &self.kummer {
                Some(k) => (DefiningPoly::Kummer(k.x.clone()), p, 1),
                None => return Err(Error::WrongLevel { op: "desc", level: "L" }),
            },
        };
        Ok(TowerDesc { level, p, d, defining, ramification: e, residue_degree: f })
    }

    /// Builds `K` of degree `d` over `Q_p` with relative precision cap `cap`.
    /// Returns the tower (through `K'`) and the normal generator `eta`.
    pub fn unramified(p: u32, d: usize, cap: i64, seed: u64) -> Result<(Arc<Tower>, PadicElem)> {
        require_odd_prime(p)?;
        if d == 0 {
            return Err(Error::InvalidDegree);
        }
        if cap < 2 {
            return Err(Error::InvalidArgument(format!("precision cap {cap} too small")));
        }
        let pu = p as u64;
        let k0 = ResidueField::arith(pu, fp_poly::first_irreducible(d, pu));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta_bar = loop {
            let cand: Vec<u64> = (0..d).map(|_| rng.gen_range(0..pu)).collect();
            if k0.is_normal(&cand) {
                break cand;
            }
        };
        let modulus = pow_p(p, cap);
        let g: Vec<BigInt> = k0.modulus().iter().map(|&c| BigInt::from(c)).collect();
        // Teichmuller lift of eta_bar in Z_p[t]/g, then its conjugates
        let q = k0.size();
        let mut eta: Vec<BigInt> = eta_bar.iter().map(|&c| BigInt::from(c)).collect();
        for _ in 0..cap {
            eta = kpow(&g, &eta, q as u128, &modulus);
        }
        let mut conj = vec![eta.clone()];
        for _ in 1..d {
            let last = conj.last().unwrap();
            conj.push(kpow(&g, last, pu as u128, &modulus));
        }
        // f = prod (X - conj_j), coefficients in Z_p[t]/g
        let mut poly: Vec<Vec<BigInt>> = vec![one_vec(d)];
        for c in &conj {
            let neg: Vec<BigInt> = c.iter().map(|x| (-x).mod_floor(&modulus)).collect();
            let mut next = vec![vec![BigInt::zero(); d]; poly.len() + 1];
            for (i, coef) in poly.iter().enumerate() {
                for (n, x) in next[i + 1].iter_mut().zip(coef) {
                    *n += x;
                }
                let prod = mul_k(&g, coef, &neg, &modulus);
                for (n, x) in next[i].iter_mut().zip(prod) {
                    *n += x;
                }
            }
            for v in next.iter_mut() {
                reduce_all(v, &modulus);
            }
            poly = next;
        }
        let mut f = Vec::with_capacity(d + 1);
        for coef in &poly {
            if coef[1..].iter().any(|c| !c.is_zero()) {
                return Err(Error::PrecisionLoss("minimal polynomial of eta not over Z_p".into()));
            }
            f.push(coef[0].clone());
        }
        let fbar: Vec<u64> = f.iter().map(|c| (c % BigInt::from(p)).try_into().unwrap()).collect();
        let residue = ResidueField::new(pu, fbar).ok_or_else(|| {
            Error::CheckFailed("eta does not generate a normal basis".into())
        })?;
        let frob = if d == 1 {
            vec![vec![BigInt::one()]]
        } else {
            // theta^{p k} = (theta^k)^p
            let theta = one_hot(d, 1);
            (0..d)
                .map(|k| {
                    let tk = kpow(&f, &theta, k as u128, &modulus);
                    kpow(&f, &tk, pu as u128, &modulus)
                })
                .collect()
        };
        let pows: Vec<BigInt> = (0..=(3 * cap + 8)).map(|k| pow_p(p, k)).collect();
        let mut base = BaseField {
            p,
            d,
            cap,
            seed,
            f,
            frob,
            traces: Vec::new(),
            residue,
            pows,
        };
        base.traces = (0..d)
            .map(|k| {
                let mut acc = vec![BigInt::zero(); d];
                let mut c = one_hot(d, k);
                for _ in 0..d {
                    for (a, x) in acc.iter_mut().zip(&c) {
                        *a += x;
                    }
                    c = frob_apply(&base.frob, &c, &modulus);
                }
                reduce_all(&mut acc, &modulus);
                debug_assert!(acc[1..].iter().all(Zero::is_zero));
                acc[0].clone()
            })
            .collect();
        let tower = Arc::new(Tower { base: Arc::new(base), kummer: None });
        let eta = if d == 1 {
            // theta is the root of X - eta, i.e. the constant eta
            let c = tower.base.f[0].clone();
            PadicElem::exact(&tower, Level::K, vec![(-c).mod_floor(&modulus)])
        } else {
            PadicElem::exact(&tower, Level::K, one_hot(d, 1))
        };
        Ok((tower, eta))
    }

    /// Extends the base tower by `T^p = x`. `x` must lie in `K'` with
    /// `x - 1` of valuation exactly `1/(p-1)`; `zeta` is the chosen
    /// primitive `p`-th root of unity of `K'`.
    pub fn with_kummer(self: &Arc<Self>, x: &PadicElem, zeta: &PadicElem) -> Result<Arc<Tower>> {
        let p = self.p();
        if !Arc::ptr_eq(&x.tower.base, &self.base) || !Arc::ptr_eq(&zeta.tower.base, &self.base) {
            return Err(Error::TowerMismatch);
        }
        let x = x.to_level(Level::Kprime)?;
        let zeta = zeta.to_level(Level::Kprime)?;
        let xm1 = &x - &PadicElem::one(self, Level::Kprime);
        if xm1.valuation() != Val::new(1, p as i64 - 1) {
            return Err(Error::BadKummerGenerator(format!("v(x - 1) = {}", xm1.valuation())));
        }
        if x.prec < self.cap() {
            return Err(Error::PrecisionLoss(format!(
                "Kummer generator known to {} digits, need {}",
                x.prec,
                self.cap()
            )));
        }
        let binom: Vec<BigInt> = (0..p as u64).map(|i| binomial_u(p as u64, i)).collect();
        let kummer = Kummer {
            x_minus_1: xm1.scaled_coords(self.cap()),
            x: x.clone(),
            zeta,
            binom,
            h_pows: OnceLock::new(),
        };
        Ok(Arc::new(Tower { base: self.base.clone(), kummer: Some(kummer) }))
    }

    pub(crate) fn h_pows(self: &Arc<Self>) -> Result<&[PadicElem]> {
        let k = self.kummer.as_ref().ok_or(Error::WrongLevel { op: "h", level: "K'" })?;
        Ok(k.h_pows.get_or_init(|| {
            let zeta = k.zeta.clone();
            let t = PadicElem::kummer_t(self).expect("kummer tower");
            let one = PadicElem::one(self, Level::L);
            let hpi = &(&zeta * &t) - &one;
            powers(&hpi, self.p() as usize)
        }))
    }
}

/// `[1, a, a^2, ..., a^{n-1}]`.
pub(crate) fn powers(a: &PadicElem, n: usize) -> Vec<PadicElem> {
    let mut out = Vec::with_capacity(n);
    let mut acc = PadicElem::one(&a.tower, a.level);
    for _ in 0..n {
        out.push(acc.clone());
        acc = &acc * a;
    }
    out
}

fn binomial_u(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn one_vec(d: usize) -> Vec<BigInt> {
    one_hot(d, 0)
}

fn one_hot(d: usize, k: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); d];
    v[k] = BigInt::one();
    v
}

fn kpow(f: &[BigInt], a: &[BigInt], mut e: u128, m: &BigInt) -> Vec<BigInt> {
    let d = f.len() - 1;
    let mut acc = one_vec(d);
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_k(f, &acc, &b, m);
        }
        e >>= 1;
        if e > 0 {
            b = mul_k(f, &b, &b, m);
        }
    }
    acc
}

pub(crate) fn frob_apply(frob: &[Vec<BigInt>], a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let d = a.len();
    let mut out = vec![BigInt::zero(); d];
    for (k, ak) in a.iter().enumerate() {
        if ak.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(&frob[k]) {
            *o += ak * x;
        }
    }
    reduce_all(&mut out, m);
    out
}

/// Precision-tracked element of one tower level:
/// `p^shift * sum coords[n] * basis[n]`, known modulo `p^prec O_level`.
#[derive(Clone)]
pub struct PadicElem {
    tower: Arc<Tower>,
    level: Level,
    shift: i64,
    prec: i64,
    coords: Vec<BigInt>,
}

impl fmt::Debug for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PadicElem[{}](p^{} * {:?} + O(p^{}))",
            self.level.name(),
            self.shift,
            self.coords,
            self.prec
        )
    }
}

impl PadicElem {
    /// Normalizing constructor: reduces coordinates, pulls out the common
    /// power of `p` and enforces the relative precision cap.
    pub(crate) fn build(
        tower: &Arc<Tower>,
        level: Level,
        mut shift: i64,
        mut prec: i64,
        mut coords: Vec<BigInt>,
    ) -> Self {
        let base = &tower.base;
        let p = base.p;
        debug_assert_eq!(coords.len(), level.dim(p, base.d));
        let zero = |prec: i64, coords: &mut Vec<BigInt>| {
            coords.iter_mut().for_each(|c| *c = BigInt::zero());
            prec.min(ZERO_PREC)
        };
        let r = prec.saturating_sub(shift);
        if r <= 0 {
            let prec = zero(prec, &mut coords);
            return PadicElem { tower: tower.clone(), level, shift: prec, prec, coords };
        }
        // very large r means an exact input: reduce only after the cap
        if r <= 4 * base.cap {
            let m = base.ppow_ref(r);
            reduce_all(&mut coords, &m);
        }
        let mut minv = i64::MAX;
        for c in &coords {
            if let Some(v) = vp(c, p) {
                minv = minv.min(v);
                if minv == 0 {
                    break;
                }
            }
        }
        if minv == i64::MAX {
            let prec = zero(prec, &mut coords);
            return PadicElem { tower: tower.clone(), level, shift: prec, prec, coords };
        }
        if minv > 0 {
            let q = base.ppow(minv);
            for c in coords.iter_mut() {
                *c = &*c / &q;
            }
            shift += minv;
        }
        if prec - shift > base.cap {
            prec = shift + base.cap;
        }
        if prec - shift < r || r > 4 * base.cap {
            let m = base.ppow_ref(prec - shift);
            reduce_all(&mut coords, &m);
        }
        PadicElem { tower: tower.clone(), level, shift, prec, coords }
    }

    /// An element known to full relative precision.
    pub fn exact(tower: &Arc<Tower>, level: Level, coords: Vec<BigInt>) -> Self {
        let mut coords = coords;
        coords.resize(level.dim(tower.p(), tower.degree()), BigInt::zero());
        Self::build(tower, level, 0, ZERO_PREC, coords)
    }

    pub fn from_parts(
        tower: &Arc<Tower>,
        level: Level,
        shift: i64,
        prec: i64,
        coords: Vec<BigInt>,
    ) -> Self {
        let mut coords = coords;
        coords.resize(level.dim(tower.p(), tower.degree()), BigInt::zero());
        Self::build(tower, level, shift, prec, coords)
    }

    pub fn zero(tower: &Arc<Tower>, level: Level) -> Self {
        Self::exact(tower, level, Vec::new())
    }

    pub fn one(tower: &Arc<Tower>, level: Level) -> Self {
        Self::from_int(tower, level, 1)
    }

    pub fn from_int(tower: &Arc<Tower>, level: Level, n: impl Into<BigInt>) -> Self {
        Self::from_bigint(tower, level, &n.into())
    }

    pub fn from_bigint(tower: &Arc<Tower>, level: Level, n: &BigInt) -> Self {
        let mut c = vec![BigInt::zero(); level.dim(tower.p(), tower.degree())];
        c[0] = n.clone();
        Self::build(tower, level, 0, ZERO_PREC, c)
    }

    /// A rational number with denominator prime to `p` times a power of `p`.
    pub fn from_ratio(tower: &Arc<Tower>, level: Level, num: &BigInt, den: &BigInt) -> Result<Self> {
        let p = tower.p();
        if num.is_zero() {
            return Ok(Self::zero(tower, level));
        }
        let vn = vp(num, p).unwrap();
        let vd = vp(den, p).ok_or_else(|| Error::InvalidArgument("zero denominator".into()))?;
        let base = &tower.base;
        let n = num / base.ppow(vn);
        let dd = den / base.ppow(vd);
        let m = base.ppow(base.cap);
        let inv = zp::inv_mod(&dd.mod_floor(&m), &m)?;
        let shift = vn - vd;
        let mut c = vec![BigInt::zero(); level.dim(p, tower.degree())];
        c[0] = (n * inv).mod_floor(&m);
        Ok(Self::build(tower, level, shift, shift + base.cap, c))
    }

    /// `gamma` in `K'`.
    pub fn gamma(tower: &Arc<Tower>) -> Self {
        let d = tower.degree();
        let mut c = vec![BigInt::zero(); Level::Kprime.dim(tower.p(), d)];
        c[d] = BigInt::one();
        Self::exact(tower, Level::Kprime, c)
    }

    /// `T = x^{1/p}` in `L`.
    pub fn kummer_t(tower: &Arc<Tower>) -> Result<Self> {
        let mut pi = Self::pi(tower)?;
        let one = Self::one(tower, Level::L);
        pi = &pi + &one;
        Ok(pi)
    }

    /// The uniformizer `Pi = T - 1` of `L`.
    pub fn pi(tower: &Arc<Tower>) -> Result<Self> {
        if !tower.has_kummer() {
            return Err(Error::WrongLevel { op: "kummer_t", level: "K'" });
        }
        let w = Level::Kprime.dim(tower.p(), tower.degree());
        let mut c = vec![BigInt::zero(); Level::L.dim(tower.p(), tower.degree())];
        c[w] = BigInt::one();
        Ok(Self::exact(tower, Level::L, c))
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn p(&self) -> u32 {
        self.tower.p()
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Absolute precision: the element is known modulo `p^prec`.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Valuation of the basis element at flat index `n`.
    fn basis_val(&self, n: usize) -> Val {
        let p = self.p() as i64;
        let d = self.tower.degree();
        let ij = (n / d) as i64;
        let (i, j) = (ij / (p - 1), ij % (p - 1));
        Val::new(i + j * p, p * (p - 1))
    }

    /// Valuation with `v(p) = 1`; an element that is zero at its precision
    /// reports its precision.
    pub fn valuation(&self) -> Val {
        let p = self.p();
        let mut best: Option<Val> = None;
        for (n, c) in self.coords.iter().enumerate() {
            if let Some(v) = vp(c, p) {
                let val = Val::from(v + self.shift) + self.basis_val(n);
                if best.is_none_or(|b| val < b) {
                    best = Some(val);
                }
            }
        }
        best.unwrap_or_else(|| Val::from(self.prec))
    }

    /// Valuation in the normalization of `level` (integer valued).
    pub fn valuation_at(&self, level: Level) -> Val {
        let p = self.p() as i64;
        let e = match level {
            Level::Qp | Level::K => 1,
            Level::Kprime => p - 1,
            Level::L => p * (p - 1),
        };
        self.valuation() * Val::from(e)
    }

    fn same_base(&self, other: &Self) -> Result<Arc<Tower>> {
        if Arc::ptr_eq(&self.tower, &other.tower) {
            return Ok(self.tower.clone());
        }
        if !Arc::ptr_eq(&self.tower.base, &other.tower.base) {
            return Err(Error::TowerMismatch);
        }
        match (self.tower.has_kummer(), other.tower.has_kummer()) {
            (true, true) => Err(Error::TowerMismatch),
            (true, false) => Ok(self.tower.clone()),
            _ => Ok(other.tower.clone()),
        }
    }

    /// Coordinates of `self` scaled to shift `s <= self.shift`, padded to
    /// `level`.
    fn coords_at(&self, s: i64, level: Level) -> Vec<BigInt> {
        let mut out = self.coords.clone();
        let k = self.shift - s;
        if k > 0 && !self.is_zero() {
            let q = self.tower.base.ppow(k);
            out.iter_mut().for_each(|c| *c *= &q);
        }
        out.resize(level.dim(self.p(), self.tower.degree()), BigInt::zero());
        out
    }

    /// Coordinates of `p^shift * coords` reduced mod `p^k` (shift >= 0).
    pub(crate) fn scaled_coords(&self, k: i64) -> Vec<BigInt> {
        assert!(self.shift >= 0, "scaled_coords of a non-integral element");
        let m = self.tower.base.ppow(k);
        let mut out = self.coords_at(0, self.level);
        reduce_all(&mut out, &m);
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let tower = self.same_base(other)?;
        let level = self.level.max(other.level);
        if self.is_zero() && self.prec >= ZERO_PREC {
            return Ok(other.embed_in(&tower, level));
        }
        if other.is_zero() && other.prec >= ZERO_PREC {
            return Ok(self.embed_in(&tower, level));
        }
        let s = self.shift.min(other.shift);
        let mut a = self.coords_at(s, level);
        let b = other.coords_at(s, level);
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        Ok(Self::build(&tower, level, s, self.prec.min(other.prec), a))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> Self {
        let coords = self.coords.iter().map(|c| -c).collect();
        Self::build(&self.tower, self.level, self.shift, self.prec, coords)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let tower = self.same_base(other)?;
        let level = self.level.max(other.level);
        let va = self.valuation();
        let vb = other.valuation();
        let bound = (va + Val::from(other.prec)).min(vb + Val::from(self.prec));
        let prec = bound.floor().to_integer().min(ZERO_PREC);
        let shift = self.shift + other.shift;
        let r = prec - shift;
        if r <= 0 || self.is_zero() || other.is_zero() {
            return Ok(Self::build(&tower, level, prec, prec, vec![BigInt::zero(); level.dim(tower.p(), tower.degree())]));
        }
        let base = &tower.base;
        let m = base.ppow(r.min(base.cap));
        let p = base.p;
        let coords = match level {
            Level::Qp => vec![(&self.coords[0] * &other.coords[0]).mod_floor(&m)],
            Level::K => {
                let a = self.coords_at(self.shift, Level::K);
                let b = other.coords_at(other.shift, Level::K);
                mul_k(&base.f, &a, &b, &m)
            }
            Level::Kprime => {
                let a = self.trimmed();
                let b = other.trimmed();
                let mut c = mul_kp(p, &base.f, &a, &b, &m);
                c.resize(level.dim(p, base.d), BigInt::zero());
                c
            }
            Level::L => {
                let k = tower.kummer.as_ref().ok_or(Error::WrongLevel { op: "mul", level: "L" })?;
                let rel = LRelation { x_minus_1: &k.x_minus_1, binom: &k.binom };
                let w = Level::Kprime.dim(p, base.d);
                let a = pad_to(self.trimmed(), w, base.d);
                let b = pad_to(other.trimmed(), w, base.d);
                mul_l(p, &base.f, &rel, &a, &b, &m)
            }
        };
        Ok(Self::build(&tower, level, shift, prec, coords))
    }

    /// Coordinates trimmed to the smallest nonzero prefix of whole `K`
    /// blocks (at least one block), scaled by nothing.
    fn trimmed(&self) -> Vec<BigInt> {
        let d = self.tower.degree();
        let last = self.coords.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
        let blocks = last / d + 1;
        let mut v = self.coords[..(blocks * d).min(self.coords.len())].to_vec();
        v.resize(blocks * d, BigInt::zero());
        v
    }

    fn embed_in(&self, tower: &Arc<Tower>, level: Level) -> Self {
        let mut coords = self.coords.clone();
        coords.resize(level.dim(tower.p(), tower.degree()), BigInt::zero());
        PadicElem { tower: tower.clone(), level, shift: self.shift, prec: self.prec, coords }
    }

    /// The same element viewed at a higher level.
    pub fn embed(&self, level: Level) -> Result<Self> {
        if level < self.level {
            return self.to_level(level);
        }
        if level == Level::L && !self.tower.has_kummer() {
            return Err(Error::WrongLevel { op: "embed", level: "K'" });
        }
        Ok(self.embed_in(&self.tower, level))
    }

    /// Lowers to `level`, requiring the higher coordinates to vanish at the
    /// element's precision.
    pub fn to_level(&self, level: Level) -> Result<Self> {
        if level >= self.level {
            return self.embed(level);
        }
        let n = level.dim(self.p(), self.tower.degree());
        if self.coords[n..].iter().any(|c| !c.is_zero()) {
            return Err(Error::NotInSubfield { field: level.name(), precision: self.prec });
        }
        Ok(PadicElem {
            tower: self.tower.clone(),
            level,
            shift: self.shift,
            prec: self.prec,
            coords: self.coords[..n].to_vec(),
        })
    }

    /// `self * p^k` (`k` may be negative).
    pub fn mul_p_pow(&self, k: i64) -> Self {
        if self.is_zero() {
            let prec = (self.prec + k).min(ZERO_PREC);
            return Self::build(&self.tower, self.level, prec, prec, self.coords.clone());
        }
        PadicElem {
            tower: self.tower.clone(),
            level: self.level,
            shift: self.shift + k,
            prec: self.prec + k,
            coords: self.coords.clone(),
        }
    }

    pub fn div_p_pow(&self, k: i64) -> Self {
        self.mul_p_pow(-k)
    }

    pub fn scale(&self, n: &BigInt) -> Self {
        let c = Self::from_bigint(&self.tower, Level::Qp, n);
        self * &c
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.tower, self.level);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    pub fn pow_big(&self, e: &BigInt) -> Self {
        assert!(!e.is_negative(), "pow_big needs a nonnegative exponent");
        let mut acc = Self::one(&self.tower, self.level);
        let mut b = self.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = &acc * &b;
            }
            if i + 1 < bits {
                b = &b * &b;
            }
        }
        acc
    }

    /// Lowers precision to at most `prec`.
    pub fn with_prec_at_most(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::build(&self.tower, self.level, self.shift, prec, self.coords.clone())
    }

    /// Valuation of `self - other`: the number of agreeing digits.
    pub fn agreement(&self, other: &Self) -> Result<Val> {
        Ok(self.checked_sub(other)?.valuation())
    }

    /// Residue class of a `K`-integer in the power basis of `k`.
    pub fn residue(&self) -> Result<Vec<u64>> {
        let a = self.to_level(Level::K)?;
        let p = BigInt::from(self.p());
        let d = self.tower.degree();
        if a.shift > 0 || a.is_zero() {
            return Ok(vec![0; d]);
        }
        if a.shift < 0 {
            return Err(Error::InvalidArgument("residue of a non-integral element".into()));
        }
        Ok(a.coords.iter().map(|c| u64::try_from(c.mod_floor(&p)).unwrap()).collect())
    }

    /// Compares digits with an element of a structurally identical tower
    /// built at a different precision. Returns the number of agreeing
    /// absolute digits, capped at the smaller precision.
    pub fn agreement_across(&self, other: &Self) -> Val {
        let prec = self.prec.min(other.prec);
        let s = self.shift.min(other.shift);
        let a = self.coords_at(s, self.level.max(other.level));
        let b = other.coords_at(s, self.level.max(other.level));
        let p = self.p();
        let mut best = Val::from(prec);
        for (n, (x, y)) in a.iter().zip(&b).enumerate() {
            let diff = x - y;
            if let Some(v) = vp(&diff, p) {
                let val = Val::from(v + s) + self.basis_val(n);
                if val < best {
                    best = val;
                }
            }
        }
        best
    }
}

fn pad_to(mut v: Vec<BigInt>, w: usize, _d: usize) -> Vec<BigInt> {
    let blocks = v.len().div_ceil(w).max(1);
    v.resize(blocks * w, BigInt::zero());
    v
}

impl std::ops::Add for &PadicElem {
    type Output = PadicElem;
    fn add(self, rhs: &PadicElem) -> PadicElem {
        self.checked_add(rhs).expect("PadicElem: tower mismatch")
    }
}

impl std::ops::Sub for &PadicElem {
    type Output = PadicElem;
    fn sub(self, rhs: &PadicElem) -> PadicElem {
        self.checked_sub(rhs).expect("PadicElem: tower mismatch")
    }
}

impl std::ops::Mul for &PadicElem {
    type Output = PadicElem;
    fn mul(self, rhs: &PadicElem) -> PadicElem {
        self.checked_mul(rhs).expect("PadicElem: tower mismatch")
    }
}

impl std::ops::Neg for &PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        self.neg_ref()
    }
}
