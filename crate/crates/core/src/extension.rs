//! The weakly ramified degree-`p` extensions `M/K`, each realized as the
//! `delta`-fixed subfield of `L = K'(x_eps^{1/p})`, with the Galois actions
//! and the self-dual generator `alpha_M`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::dwork::{x_of_eps, zeta_of_gamma, DworkSeries};
use crate::error::{Error, Result};
use crate::padic::trace_k_fast as trace_k;
use crate::padic::zp::{mu_generator, ZpInt};
use crate::padic::{
    pow_padic, powers, teichmuller, trace_norm, FieldPair, Level, PadicElem, Tower, TraceOrNorm, Val,
};

/// A class of `k^x / F_p^x`, represented by the normal-basis coordinate
/// vector whose first nonzero entry is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonClass {
    /// 1-based position in the enumeration order.
    pub index: usize,
    /// Coordinates over the normal basis `eta^{p^j}` of `k`.
    pub normal: Vec<u64>,
    /// Power-basis coordinates of the residue.
    pub residue: Vec<u64>,
    /// `Tr(eps)`: trace of the Teichmuller lift, known mod `p^cap`.
    pub trace: BigInt,
    pub trace_mod_p: u64,
}

impl EpsilonClass {
    pub fn trace_mod_p2(&self, p: u32) -> i64 {
        let m = BigInt::from((p as i64) * (p as i64));
        let r = ((&self.trace % &m) + &m) % &m;
        i64::try_from(r).unwrap()
    }

    pub fn label(&self) -> String {
        self.normal.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// All `(p^d - 1)/(p - 1)` classes, in lexicographic order of their
/// canonical representatives.
pub fn enumerate_eps(tower: &Arc<Tower>) -> Result<Vec<EpsilonClass>> {
    let k = tower.residue_field();
    let p = k.p();
    let d = k.degree();
    let mut out = Vec::new();
    let total = p.pow(d as u32);
    for code in 1..total {
        // most significant digit first: lexicographic in (u_0, u_1, ...)
        let mut u = vec![0u64; d];
        let mut c = code;
        for j in (0..d).rev() {
            u[j] = c % p;
            c /= p;
        }
        if u.iter().find(|&&x| x != 0) != Some(&1) {
            continue;
        }
        let residue = k.from_normal(&u);
        let lift = teichmuller(tower, &residue)?;
        let tr = trace_k(&lift)?;
        let trace = tr.scaled_coords(tower.cap())[0].clone();
        let trace_mod_p = k.trace(&residue);
        out.push(EpsilonClass { index: out.len() + 1, normal: u, residue, trace, trace_mod_p });
    }
    Ok(out)
}

/// Outcome of the automorphism order checks on `T`.
#[derive(Clone, Debug)]
pub struct OrderChecks {
    pub h_order: Val,
    pub delta_order: Val,
    pub delta_kummer: Val,
    pub commute: Val,
    /// `h^k(T) != T` for `0 < k < p` and `delta^k(T) != T` for
    /// `0 < k < p - 1`.
    pub faithful: bool,
}

#[derive(Clone, Debug)]
pub struct WeakExtension {
    pub eps: EpsilonClass,
    /// Target precision `N` of the run.
    pub n: i64,
    base: Arc<Tower>,
    tower: Arc<Tower>,
    pub x: PadicElem,
    pub zeta: PadicElem,
    pub mu: ZpInt,
    mu_elem: PadicElem,
    t: PadicElem,
    d_pows: Vec<PadicElem>,
    /// `delta^s(T)`, `s = 0..p-2`.
    delta_orbit: Vec<PadicElem>,
    pub orders: OrderChecks,
    alpha: PadicElem,
    pi_m: PadicElem,
}

/// Builds `L = K'(x_eps^{1/p})`, installs `h` and `delta` and computes
/// `alpha_M`.
pub fn build_extension(
    base: &Arc<Tower>,
    eta: &PadicElem,
    series: &DworkSeries,
    eps: &EpsilonClass,
    n: i64,
) -> Result<WeakExtension> {
    let p = base.p();
    let cap = base.cap();
    let x = x_of_eps(series, eta, &eps.normal)?;
    let zeta = zeta_of_gamma(series, base)?;
    let tower = base.with_kummer(&x, &zeta)?;
    let mu = mu_generator(p, cap + 8);
    let mu_elem = PadicElem::from_bigint(&tower, Level::Qp, &mu.value).with_prec_at_most(cap + 8);
    let t = PadicElem::kummer_t(&tower)?;
    let delta_t = pow_padic(&t, &mu)?;
    let one = PadicElem::one(&tower, Level::L);
    let d_pows = powers(&(&delta_t - &one), p as usize);
    let mut w = WeakExtension {
        eps: eps.clone(),
        n,
        base: base.clone(),
        tower: tower.clone(),
        x,
        zeta,
        mu,
        mu_elem,
        t: t.clone(),
        d_pows,
        delta_orbit: Vec::new(),
        orders: OrderChecks {
            h_order: Val::zero(),
            delta_order: Val::zero(),
            delta_kummer: Val::zero(),
            commute: Val::zero(),
            faithful: false,
        },
        alpha: one.clone(),
        pi_m: one.clone(),
    };
    let mut orbit = vec![t.clone()];
    for _ in 1..p - 1 {
        let next = w.delta(orbit.last().unwrap())?;
        orbit.push(next);
    }
    w.delta_orbit = orbit;
    w.orders = w.order_checks()?;
    let tol = Val::from(n - 3);
    let o = &w.orders;
    if o.h_order < tol || o.delta_order < tol || o.delta_kummer < tol || o.commute < tol || !o.faithful {
        return Err(Error::CheckFailed(format!("automorphism orders: {o:?}")));
    }
    let mut sum = one.clone();
    for s in &w.delta_orbit {
        sum = &sum + s;
    }
    w.alpha = sum.div_p_pow(1);
    let mut pi_m = one.clone();
    for s in &w.delta_orbit {
        pi_m = &pi_m * &(s - &one);
    }
    w.pi_m = pi_m;
    let fixed = w.delta(&w.alpha)?.agreement(&w.alpha)?;
    if fixed < tol {
        return Err(Error::CheckFailed(format!("delta(alpha) != alpha ({fixed} digits)")));
    }
    let v = w.alpha.valuation_at(Level::L) / Val::from(p as i64 - 1);
    if v != Val::from(1 - p as i64) {
        return Err(Error::CheckFailed(format!("v_M(alpha) = {v}")));
    }
    Ok(w)
}

impl WeakExtension {
    pub fn p(&self) -> u32 {
        self.tower.p()
    }

    pub fn d(&self) -> usize {
        self.tower.degree()
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn base(&self) -> &Arc<Tower> {
        &self.base
    }

    /// `T = x^{1/p}`.
    pub fn t(&self) -> &PadicElem {
        &self.t
    }

    pub fn alpha(&self) -> &PadicElem {
        &self.alpha
    }

    /// The uniformizer `prod_s delta^s(T - 1)` of `M`.
    pub fn pi_m(&self) -> &PadicElem {
        &self.pi_m
    }

    /// `delta^s(T)` for `0 <= s < p - 1`.
    pub fn delta_t(&self, s: usize) -> &PadicElem {
        &self.delta_orbit[s % self.delta_orbit.len()]
    }

    /// `mu` as an element of `Q_p`.
    pub fn mu_elem(&self) -> &PadicElem {
        &self.mu_elem
    }

    /// The automorphism `delta`: `gamma -> mu gamma`, `T -> T^mu`, fixing `K`.
    pub fn delta(&self, y: &PadicElem) -> Result<PadicElem> {
        let mu = &self.mu_elem;
        let twist = |c: &PadicElem| c.gamma_twist(mu).expect("K' coefficient");
        if y.level() < Level::L {
            return y.to_level(Level::Kprime)?.gamma_twist(mu);
        }
        Ok(y.apply_l_auto(twist, &self.d_pows))
    }

    pub fn delta_pow(&self, y: &PadicElem, s: usize) -> Result<PadicElem> {
        let mut a = y.clone();
        for _ in 0..s {
            a = self.delta(&a)?;
        }
        Ok(a)
    }

    /// `h^t`, where `h(T) = zeta T` fixes `K'`.
    pub fn h(&self, y: &PadicElem, t: u32) -> Result<PadicElem> {
        y.embed(Level::L)?.h_tilde(t)
    }

    fn order_checks(&self) -> Result<OrderChecks> {
        let p = self.p();
        let t = &self.t;
        let mut a = t.clone();
        let mut faithful = true;
        for k in 1..=p {
            a = self.h(&a, 1)?;
            if k < p {
                faithful &= a.agreement(t)? < Val::from(1);
            }
        }
        let h_order = a.agreement(t)?;
        let delta_order = self.delta(self.delta_t(p as usize - 2))?.agreement(t)?;
        // delta(T)^p = delta(x) must equal x^mu
        let x_mu = pow_padic(&self.x, &self.mu)?;
        let delta_kummer = self.delta_t(1).pow(p as u64).agreement(&x_mu)?;
        let dh = self.delta(&self.h(t, 1)?)?;
        let hd = self.h(&self.delta(t)?, 1)?;
        let commute = dh.agreement(&hd)?;
        for s in 1..p as usize - 1 {
            faithful &= self.delta_t(s).agreement(t)? < Val::from(1);
        }
        Ok(OrderChecks { h_order, delta_order, delta_kummer, commute, faithful })
    }

    /// `Tr_{L/K'}`, lowered to `K` (valid on `delta`-invariant inputs).
    pub fn trace_to_k(&self, y: &PadicElem) -> Result<PadicElem> {
        trace_norm(FieldPair::LOverKprime, y, TraceOrNorm::Trace)?.to_level(Level::K)
    }

    /// `N_{L/K'}`, lowered to `K` (valid on `delta`-invariant inputs).
    pub fn norm_to_k(&self, y: &PadicElem) -> Result<PadicElem> {
        trace_norm(FieldPair::LOverKprime, y, TraceOrNorm::Norm)?.to_level(Level::K)
    }

    /// Conjugates `h^i(a)`, `i = 0..p-1`.
    pub fn h_orbit(&self, a: &PadicElem) -> Result<Vec<PadicElem>> {
        let mut out = vec![a.embed(Level::L)?];
        for _ in 1..self.p() {
            let next = self.h(out.last().unwrap(), 1)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Valuation `v_M` of `prod_{t != 0} (pi_M - h^t pi_M)`, the different
    /// of `M/K`.
    pub fn different_valuation(&self) -> Result<Val> {
        let orbit = self.h_orbit(&self.pi_m)?;
        let mut acc = PadicElem::one(&self.tower, Level::L);
        for c in &orbit[1..] {
            acc = &acc * &(&orbit[0] - c);
        }
        Ok(acc.valuation_at(Level::L) / Val::from(self.p() as i64 - 1))
    }
}

/// Gram matrix of the trace form on the `H`-orbit of `a`.
#[derive(Clone, Debug)]
pub struct GramResult {
    pub matrix: Vec<Vec<PadicElem>>,
    /// Digits to which the matrix equals the identity.
    pub residual: Val,
    pub symmetric: bool,
    pub circulant: bool,
    pub pass: bool,
}

pub fn selfdual_gram(w: &WeakExtension, a: &PadicElem) -> Result<GramResult> {
    let p = w.p() as usize;
    let orbit = w.h_orbit(a)?;
    let mut matrix: Vec<Vec<PadicElem>> = vec![Vec::with_capacity(p); p];
    let mut residual = Val::from(i64::MAX / 4);
    for i in 0..p {
        for j in 0..p {
            let g = if j < i {
                matrix[j][i].clone()
            } else {
                w.trace_to_k(&(&orbit[i] * &orbit[j]))?
            };
            let target = PadicElem::from_int(&w.base, Level::K, i64::from(i == j));
            residual = residual.min(g.agreement(&target)?);
            matrix[i].push(g);
        }
    }
    let tol = Val::from(w.n - 3);
    let mut symmetric = true;
    let mut circulant = true;
    for i in 0..p {
        for j in 0..p {
            // recompute the lower triangle once to test symmetry honestly
            if j < i {
                let direct = w.trace_to_k(&(&orbit[i] * &orbit[j]))?;
                symmetric &= direct.agreement(&matrix[i][j])? >= tol;
            }
            let shifted = &matrix[(i + 1) % p][(j + 1) % p];
            circulant &= shifted.agreement(&matrix[i][j])? >= tol;
        }
    }
    let pass = residual >= tol && symmetric && circulant;
    Ok(GramResult { matrix, residual, symmetric, circulant, pass })
}

/// Whether `O_K[H] a` equals `p_M^{-(p-1)}`, via the change of basis to
/// `{pi_M^{t-(p-1)}}`.
#[derive(Clone, Debug)]
pub struct LatticeResult {
    /// Digits to which each `pi_M^{p-1} h^i(a)` is reproduced by its
    /// coordinates over `pi_M^t`.
    pub residual: Val,
    /// `v_K` of the change-of-basis determinant; `None` if some conjugate
    /// lies outside the lattice.
    pub det_valuation: Option<Val>,
    pub pass: bool,
}

/// Valuation-pivoting Gaussian elimination over `K`; returns the
/// determinant's valuation.
pub fn det_valuation(mut m: Vec<Vec<PadicElem>>) -> Result<Val> {
    let n = m.len();
    let mut total = Val::zero();
    for c in 0..n {
        let (best, _) = (c..n)
            .map(|r| (r, m[r][c].valuation()))
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("nonempty");
        if m[best][c].is_zero() {
            return Ok(Val::from(m[best][c].prec()));
        }
        m.swap(c, best);
        total += m[c][c].valuation();
        let inv = m[c][c].inverse_k()?;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] * &inv;
            for k in c..n {
                let sub = &f * &m[c][k];
                m[r][k] = &m[r][k] - &sub;
            }
        }
    }
    Ok(total)
}

/// Solves `A x = b` over `K` for a square `A` with unit determinant.
fn solve_unit(a: &[Vec<PadicElem>], b: &[PadicElem]) -> Result<Vec<PadicElem>> {
    let n = a.len();
    let mut m: Vec<Vec<PadicElem>> = a.to_vec();
    let mut rhs: Vec<PadicElem> = b.to_vec();
    for c in 0..n {
        let piv = (c..n)
            .find(|&r| !m[r][c].is_zero() && m[r][c].valuation() == Val::zero())
            .ok_or_else(|| Error::CheckFailed("basis minor is not unimodular".into()))?;
        m.swap(c, piv);
        rhs.swap(c, piv);
        let inv = m[c][c].inverse_k()?;
        for k in c..n {
            m[c][k] = &m[c][k] * &inv;
        }
        rhs[c] = &rhs[c] * &inv;
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone();
            for k in c..n {
                let sub = &f * &m[c][k];
                m[r][k] = &m[r][k] - &sub;
            }
            let sub = &f * &rhs[c];
            rhs[r] = &rhs[r] - &sub;
        }
    }
    Ok(rhs)
}

/// `K`-coordinate of `y` at the basis position `Pi^i gamma^j`.
fn k_coord(y: &PadicElem, i: usize, j: usize) -> PadicElem {
    y.pi_coeff(i).gamma_coeff(j)
}

pub fn lattice_check(w: &WeakExtension, a: &PadicElem) -> Result<LatticeResult> {
    let p = w.p() as usize;
    let basis = powers(&w.pi_m, p);
    // rows where pi_M^t has its leading unit coordinate: i + j p = t (p-1)
    let rows: Vec<(usize, usize)> = (0..p).map(|t| ((t * (p - 1)) % p, (t * (p - 1)) / p)).collect();
    let minor: Vec<Vec<PadicElem>> = rows
        .iter()
        .map(|&(i, j)| basis.iter().map(|b| k_coord(b, i, j)).collect())
        .collect();
    let scale = w.pi_m.pow(p as u64 - 1);
    let orbit = w.h_orbit(a)?;
    let mut coeffs: Vec<Vec<PadicElem>> = Vec::with_capacity(p);
    let mut residual = Val::from(i64::MAX / 4);
    let mut inside = true;
    for y in &orbit {
        let target = &scale * y;
        let rhs: Vec<PadicElem> = rows.iter().map(|&(i, j)| k_coord(&target, i, j)).collect();
        let c = solve_unit(&minor, &rhs)?;
        let mut back = PadicElem::zero(&w.tower, Level::L);
        for (ct, bt) in c.iter().zip(&basis) {
            back = &back + &(ct * bt);
        }
        residual = residual.min(back.agreement(&target)?);
        inside &= c.iter().all(|x| x.valuation() >= Val::zero());
        coeffs.push(c);
    }
    let tol = Val::from(w.n - 3);
    if !inside || residual < tol {
        return Ok(LatticeResult { residual, det_valuation: None, pass: false });
    }
    let dv = det_valuation(coeffs)?;
    Ok(LatticeResult { residual, det_valuation: Some(dv), pass: dv == Val::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(p: u32, d: usize, idx: usize) -> WeakExtension {
        let n = 8;
        let cap = n + 6;
        let (base, eta) = Tower::unramified(p, d, cap, 1).unwrap();
        let s = DworkSeries::new(p, cap).unwrap();
        let eps = enumerate_eps(&base).unwrap();
        build_extension(&base, &eta, &s, &eps[idx], n).unwrap()
    }

    #[test]
    fn class_counts() {
        for (p, d, r) in [(3u32, 1usize, 1usize), (3, 2, 4), (5, 2, 6)] {
            let (t, _) = Tower::unramified(p, d, 6, 1).unwrap();
            let eps = enumerate_eps(&t).unwrap();
            assert_eq!(eps.len(), r);
            for e in &eps {
                assert_eq!(e.normal.iter().find(|&&c| c != 0), Some(&1));
            }
        }
    }

    #[test]
    fn extension_q3() {
        let w = build(3, 1, 0);
        assert!(w.orders.faithful);
        assert_eq!(w.alpha().valuation(), Val::new(-2, 3));
        let g = selfdual_gram(&w, w.alpha()).unwrap();
        assert!(g.pass, "{:?}", g.residual);
        let l = lattice_check(&w, w.alpha()).unwrap();
        assert!(l.pass, "{l:?}");
        assert_eq!(w.different_valuation().unwrap(), Val::from(4));
    }

    #[test]
    fn perturbations() {
        let w = build(3, 1, 0);
        let pa = w.alpha().mul_p_pow(1);
        let l = lattice_check(&w, &pa).unwrap();
        assert!(!l.pass);
        assert_eq!(l.det_valuation, Some(Val::from(3)));
        let one = PadicElem::one(w.tower(), Level::L);
        let a1 = w.alpha() + &one;
        assert!(!selfdual_gram(&w, &a1).unwrap().pass);
        // alpha + 1 = (1 + sum_h h) alpha and 1 + sum_h h is a unit of O_K[H],
        // so the lattice is unchanged
        assert!(lattice_check(&w, &a1).unwrap().pass);
    }

    #[test]
    fn delta_commutes_with_h() {
        let w = build(5, 1, 0);
        assert!(w.orders.commute >= Val::from(5));
        let y = &(w.t() * w.t()) + &PadicElem::gamma(w.base());
        let lhs = w.delta(&w.h(&y, 2).unwrap()).unwrap();
        let rhs = w.h(&w.delta(&y).unwrap(), 2).unwrap();
        assert!(lhs.agreement(&rhs).unwrap() >= Val::from(5));
    }

    #[test]
    fn selfdual_across_grid() {
        for (p, d, idx) in [(5u32, 2usize, 3usize), (7, 1, 0), (3, 2, 1)] {
            let w = build(p, d, idx);
            assert!(selfdual_gram(&w, w.alpha()).unwrap().pass, "p={p} d={d}");
            assert!(lattice_check(&w, w.alpha()).unwrap().pass, "p={p} d={d}");
            assert_eq!(w.different_valuation().unwrap(), Val::from(2 * (p as i64 - 1)));
        }
    }
}
