//! The character `chi` of `K^x` cut out by `M/K`, definitional and
//! modified Galois Gauss sums, and their closed form.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclotomic::CycInt;
use crate::error::{Error, Result};
use crate::extension::WeakExtension;
use crate::padic::field::{fp_linalg, Residue, ResidueField};
use crate::padic::{teichmuller, trace_k_fast, Level, PadicElem, Tower};

/// `chi^j`, determined by `v_chi` through
/// `chi^j(omega (1 + u p)) = zeta^{-j Tr(u v_chi)}` and `chi(p) = 1`.
#[derive(Clone, Debug)]
pub struct WeakCharacter {
    pub p: u32,
    pub d: usize,
    pub j: u32,
    tower: Arc<Tower>,
    vchi: PadicElem,
    vchi_bar: Residue,
}

impl WeakCharacter {
    pub fn new(tower: &Arc<Tower>, vchi: PadicElem, j: u32) -> Result<Self> {
        let vchi = vchi.to_level(Level::K)?;
        let vchi_bar = vchi.residue()?;
        if vchi.valuation() != crate::padic::Val::from(0) || tower.residue_field().is_zero(&vchi_bar) {
            return Err(Error::InvalidArgument("v_chi must be a unit".into()));
        }
        Ok(WeakCharacter {
            p: tower.p(),
            d: tower.degree(),
            j: j % tower.p(),
            tower: tower.clone(),
            vchi,
            vchi_bar,
        })
    }

    /// `chi^{j k}`.
    pub fn power(&self, k: u32) -> Self {
        let mut c = self.clone();
        c.j = ((self.j as u64 * k as u64) % self.p as u64) as u32;
        c
    }

    pub fn vchi(&self) -> &PadicElem {
        &self.vchi
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    /// Conductor exponent: 0 for the trivial character, 2 otherwise.
    pub fn conductor(&self) -> u32 {
        if self.j == 0 {
            0
        } else {
            2
        }
    }

    /// `t` with `chi^j(a) = zeta^t`.
    pub fn zeta_log(&self, a: &PadicElem) -> Result<i64> {
        let u = unit_part_u(a)?;
        let k = self.tower.residue_field();
        let tr = k.trace(&k.mul(&u, &self.vchi_bar)) as i64;
        Ok((-(self.j as i64) * tr).rem_euclid(self.p as i64))
    }
}

/// `u mod p` in `a = p^v omega (1 + u p)`, from
/// `(omega (1 + u p))^{q-1} = 1 - u p mod p^2`.
fn unit_part_u(a: &PadicElem) -> Result<Residue> {
    let a = a.to_level(Level::K)?;
    if a.is_zero() {
        return Err(Error::ZeroResidue);
    }
    let v = a.valuation().to_integer();
    let unit = a.div_p_pow(v);
    if unit.prec() < 2 {
        return Err(Error::PrecisionLoss("character value needs two digits".into()));
    }
    let q = unit.tower().residue_field().size();
    let w = unit.with_prec_at_most(2).pow(q - 1);
    let one = PadicElem::one(unit.tower(), Level::K);
    let diff = (&one - &w).div_p_pow(1);
    diff.residue()
}

pub fn chi_eval(c: &WeakCharacter, a: &PadicElem) -> Result<CycInt> {
    Ok(CycInt::zeta_pow(c.p, c.zeta_log(a)?))
}

/// Power-basis coordinates of the `F_p`-span of `rows`, reduced.
fn span(rows: &[Residue], p: u64) -> Vec<Residue> {
    let mut m = rows.to_vec();
    let piv = fp_linalg::rref(&mut m, p);
    m.truncate(piv.len());
    m
}

/// Image in `U^1/U^2 = k` of a unit of `O_K`, Teichmuller part removed.
fn u1_image(a: &PadicElem) -> Result<Residue> {
    unit_part_u(a)
}

/// `Tr(a b)` on `k`.
fn trace_pair(k: &ResidueField, a: &[u64], b: &[u64]) -> u64 {
    k.trace(&k.mul(a, b))
}

/// Outcome of pinning `v_chi`.
#[derive(Clone, Debug)]
pub struct VchiResult {
    /// Basis of the hyperplane `V` of norms in `U^1/U^2`.
    pub hyperplane: Vec<Residue>,
    /// Generator of the annihilator line of `V` under the trace form.
    pub line: Residue,
    /// Candidates for `v_chi`: one when `Tr(eps) != 0 mod p`, else `p - 1`.
    pub candidates: Vec<PadicElem>,
    pub ambiguous: bool,
    /// `p` is a norm from `M`: `N(pi_M)/p` has its `U^1`-image in `V`.
    pub p_is_norm: bool,
}

/// Norm-subgroup hyperplane and trace pinning of `v_chi`.
pub fn vchi_from_eps(w: &WeakExtension) -> Result<VchiResult> {
    let tower = w.base().clone();
    let k = tower.residue_field();
    let p = k.p();
    let d = k.degree();
    let one = PadicElem::one(w.tower(), Level::L);
    let conj = crate::dwork::eta_conjugates(&teichmuller(&tower, &k.generator())?)?;
    let mut images = Vec::new();
    for a in &conj {
        let y = &one + &(&a.embed(Level::Kprime)?.embed_in_l(w)? * w.pi_m());
        images.push(u1_image(&w.norm_to_k(&y)?)?);
    }
    let hyperplane = span(&images, p);
    if hyperplane.len() != d - 1 {
        return Err(Error::CheckFailed(format!("norm hyperplane has dimension {}", hyperplane.len())));
    }
    let b = power_trace_form(k);
    let rows: Vec<Residue> = hyperplane.iter().map(|u| fp_linalg::mat_vec(&transpose(&b), u, p)).collect();
    let null = if rows.is_empty() {
        vec![k.one()]
    } else {
        fp_linalg::nullspace(&rows, d, p)
    };
    if null.len() != 1 {
        return Err(Error::CheckFailed(format!("annihilator has dimension {}", null.len())));
    }
    let line = null[0].clone();
    let tr_line = k.trace(&line);
    let tr_eps = w.eps.trace_mod_p;
    let scales: Vec<u64> = if tr_eps != 0 {
        if tr_line == 0 {
            return Err(Error::CheckFailed("trace vanishes on the v_chi line".into()));
        }
        vec![tr_eps * fp_inv(tr_line, p) % p]
    } else {
        if tr_line != 0 {
            return Err(Error::CheckFailed("Tr(eps) = 0 but the trace is nonzero on the line".into()));
        }
        (1..p).collect()
    };
    let candidates = scales
        .iter()
        .map(|&c| lift_with_trace(&tower, &k.scale(&line, c), &w.eps.trace))
        .collect::<Result<Vec<_>>>()?;
    let np = w.norm_to_k(w.pi_m())?.div_p_pow(1);
    let img = u1_image(&np)?;
    let mut with = hyperplane.clone();
    with.push(img);
    let p_is_norm = span(&with, p).len() == hyperplane.len();
    Ok(VchiResult { hyperplane, line, ambiguous: scales.len() > 1, candidates, p_is_norm })
}

trait EmbedL {
    fn embed_in_l(&self, w: &WeakExtension) -> Result<PadicElem>;
}

impl EmbedL for PadicElem {
    fn embed_in_l(&self, w: &WeakExtension) -> Result<PadicElem> {
        let z = PadicElem::zero(w.tower(), Level::L);
        z.checked_add(self)
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    crate::padic::field::fp_poly::inv(a, p)
}

fn transpose(m: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()
}

/// `Tr(t^i t^k)` on the power basis of `k`.
fn power_trace_form(k: &ResidueField) -> Vec<Vec<u64>> {
    let d = k.degree();
    let e = |i: usize| {
        let mut v = vec![0u64; d];
        v[i] = 1;
        v
    };
    (0..d).map(|i| (0..d).map(|j| trace_pair(k, &e(i), &e(j))).collect()).collect()
}

/// A lift of `bar` to `O_K` whose trace is `target` to full precision.
fn lift_with_trace(tower: &Arc<Tower>, bar: &[u64], target: &BigInt) -> Result<PadicElem> {
    let cap = tower.cap();
    let coords: Vec<BigInt> = bar.iter().map(|&c| BigInt::from(c)).collect();
    let v = PadicElem::from_parts(tower, Level::K, 0, cap, coords);
    let tr = trace_k_fast(&v)?;
    let target = PadicElem::from_bigint(tower, Level::Qp, target).with_prec_at_most(cap);
    let diff = &target - &tr;
    if diff.valuation() < crate::padic::Val::from(1) {
        return Err(Error::CheckFailed("trace pinning: residues disagree".into()));
    }
    // theta^k with a unit trace exists since the trace form is nondegenerate
    let traces = tower.base().theta_traces();
    let p = BigInt::from(tower.p());
    let kk = traces
        .iter()
        .position(|t| !(t % &p).is_zero())
        .ok_or_else(|| Error::CheckFailed("no basis element has unit trace".into()))?;
    let mut e = vec![BigInt::zero(); tower.degree()];
    e[kk] = BigInt::from(1);
    let basis = PadicElem::exact(tower, Level::K, e);
    let t = PadicElem::from_bigint(tower, Level::K, &traces[kk]).with_prec_at_most(cap);
    let corr = &(&basis * &diff) * &t.inverse_k()?;
    Ok(&v + &corr)
}

/// Fresh norm samples: `U^1`-images of norms of random units of `M`.
#[derive(Clone, Debug)]
pub struct NormSampleCheck {
    pub samples: usize,
    /// Every image satisfies `Tr(u v_chi) = 0 mod p`.
    pub in_kernel: bool,
    /// Rank of the images; `d - 1` when they fill the hyperplane.
    pub rank: usize,
    pub pass: bool,
}

pub fn norm_sample_check(w: &WeakExtension, vchi: &PadicElem, seed: u64, count: usize) -> Result<NormSampleCheck> {
    let base = w.base();
    let k = base.residue_field();
    let p = k.p();
    let d = k.degree();
    let vbar = vchi.residue()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f726d);
    let pows = crate::padic::powers(w.pi_m(), w.p() as usize);
    let mut images = Vec::new();
    let mut in_kernel = true;
    for _ in 0..count {
        let mut y = PadicElem::zero(w.tower(), Level::L);
        for (t, pt) in pows.iter().enumerate() {
            let mut c: Vec<BigInt> = (0..d).map(|_| BigInt::from(rng.gen_range(0..p))).collect();
            if t == 0 && c.iter().all(|x| x.is_zero()) {
                c[0] = BigInt::from(1);
            }
            let ce = PadicElem::exact(base, Level::K, c).embed_in_l(w)?;
            y = &y + &(&ce * pt);
        }
        let img = u1_image(&w.norm_to_k(&y)?)?;
        in_kernel &= trace_pair(k, &img, &vbar) == 0;
        images.push(img);
    }
    let rank = fp_linalg::rank(&images, p);
    Ok(NormSampleCheck { samples: count, in_kernel, rank, pass: in_kernel && rank + 1 == d })
}

/// Additive character values: `Tr(x) mod p^2` for `x` an `O_K`-integer.
fn trace_mod_p2(x: &PadicElem) -> Result<i64> {
    let t = trace_k_fast(x)?;
    let p2 = (t.p() as i64).pow(2);
    if t.is_zero() {
        return Ok(0);
    }
    let c = t.scaled_coords(2)[0].to_i64().unwrap();
    Ok(c.rem_euclid(p2))
}

/// Representatives of `(O_K/p^2)^x`: `omega (1 + u p)` with `omega` a
/// Teichmuller lift and `u = sum c_j eta^{p^j}`.
pub struct UnitReps {
    p: u32,
    reps: Vec<PadicElem>,
}

impl UnitReps {
    pub fn new(tower: &Arc<Tower>) -> Result<Self> {
        Self::with_offsets(tower, None)
    }

    /// Same classes, each moved by a random multiple of `p^2`.
    pub fn randomized(tower: &Arc<Tower>, seed: u64) -> Result<Self> {
        Self::with_offsets(tower, Some(seed))
    }

    fn with_offsets(tower: &Arc<Tower>, seed: Option<u64>) -> Result<Self> {
        let k = tower.residue_field();
        let p = k.p();
        let d = k.degree();
        let q = k.size();
        let eta = teichmuller(tower, &k.generator())?;
        let conj = crate::dwork::eta_conjugates(&eta)?;
        let mut omegas = Vec::new();
        for code in 1..q {
            let r: Residue = (0..d).map(|i| (code / p.pow(i as u32)) % p).collect();
            omegas.push(teichmuller(tower, &r)?.with_prec_at_most(3));
        }
        let one = PadicElem::one(tower, Level::K);
        let mut us = Vec::new();
        for code in 0..q {
            let mut u = PadicElem::zero(tower, Level::K);
            for (i, c) in conj.iter().enumerate() {
                let cj = (code / p.pow(i as u32)) % p;
                if cj != 0 {
                    u = &u + &c.scale(&BigInt::from(cj));
                }
            }
            us.push(&one + &u.mul_p_pow(1));
        }
        let mut rng = seed.map(|s| ChaCha8Rng::seed_from_u64(s ^ 0x72657073));
        let mut reps = Vec::with_capacity((q * (q - 1)) as usize);
        for om in &omegas {
            for u in &us {
                let mut x = (om * u).with_prec_at_most(3);
                if let Some(r) = rng.as_mut() {
                    let c: Vec<BigInt> = (0..d).map(|_| BigInt::from(r.gen_range(0..p))).collect();
                    x = &x + &PadicElem::exact(tower, Level::K, c).mul_p_pow(2);
                    x = x.with_prec_at_most(3);
                }
                reps.push(x);
            }
        }
        Ok(UnitReps { p: tower.p(), reps })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

/// `tau_K(chi^j) = sum_x chi^j(x / p^2) psi_K(x / p^2)` with
/// `psi_K(x / p^2) = xi^{Tr(x) mod p^2}`; 1 for the trivial character.
pub fn tau_def(c: &WeakCharacter) -> Result<CycInt> {
    if c.j == 0 {
        return Ok(CycInt::one(c.p));
    }
    tau_def_with(c, &UnitReps::new(&c.tower)?)
}

pub fn tau_def_with(c: &WeakCharacter, reps: &UnitReps) -> Result<CycInt> {
    if c.j == 0 {
        return Ok(CycInt::one(c.p));
    }
    let p = reps.p as i64;
    let mut counts = vec![BigInt::zero(); (p * p) as usize];
    for x in &reps.reps {
        let e = trace_mod_p2(x)? + p * c.zeta_log(x)?;
        counts[e.rem_euclid(p * p) as usize] += 1;
    }
    Ok(CycInt::from_coeffs(c.p, &counts))
}

/// `1 / tau` for `tau tau-bar = p^{2d}`, with exactness asserted.
fn tau_inverse_times(num: &CycInt, tau: &CycInt, d: usize) -> Result<CycInt> {
    let q2 = BigInt::from(tau.p()).pow(2 * d as u32);
    let prod = num.checked_mul(&tau.conj())?;
    prod.div_exact(&q2)
}

/// `c_{K,2} = p^2 / (4 v_chi)`.
pub fn c_k2(c: &WeakCharacter) -> Result<PadicElem> {
    let four = PadicElem::from_int(&c.tower, Level::K, 4);
    Ok((&four * &c.vchi).inverse_k()?.mul_p_pow(2))
}

/// `tau^*(chi^j - chi^{2j}) = chi^j(c_{K,2})^{-1} tau(chi^j) tau(chi^{2j})^{-1}`,
/// and 1 for the trivial character.
pub fn tau_star_twisted(c: &WeakCharacter) -> Result<CycInt> {
    if c.j == 0 {
        return Ok(CycInt::one(c.p));
    }
    tau_star_from(c, &tau_def(c)?, &tau_def(&c.power(2))?)
}

/// `tau_star_twisted` from precomputed `tau(chi^j)` and `tau(chi^{2j})`.
pub fn tau_star_from(c: &WeakCharacter, tau_j: &CycInt, tau_2j: &CycInt) -> Result<CycInt> {
    if c.j == 0 {
        return Ok(CycInt::one(c.p));
    }
    let chi_c = chi_eval(c, &c_k2(c)?)?;
    tau_inverse_times(&chi_c.conj().checked_mul(tau_j)?, tau_2j, c.d)
}

/// `tau^*` of the trivial character: `y_{K,2} = -1` times `tau = 1`.
pub fn tau_star_trivial(p: u32) -> CycInt {
    CycInt::from_int(p, -1)
}

/// `chi^j(j^{-1}) xi^{-j Tr(eps)}`.
pub fn gauss_closed_form(c: &WeakCharacter, trace_eps_mod_p2: i64) -> Result<CycInt> {
    if c.j == 0 {
        return Ok(CycInt::one(c.p));
    }
    let jinv = PadicElem::from_ratio(&c.tower, Level::K, &BigInt::from(1), &BigInt::from(c.j))?;
    let chi = chi_eval(c, &jinv)?;
    let root = CycInt::root(c.p, -(c.j as i64) * trace_eps_mod_p2);
    chi.checked_mul(&root)
}

/// `tau tau-bar`.
pub fn magnitude(tau: &CycInt) -> Result<CycInt> {
    tau.checked_mul(&tau.conj())
}
