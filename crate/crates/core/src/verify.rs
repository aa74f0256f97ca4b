//! Orchestration of all checks over a `(p, d, eps)` grid, with text and
//! JSON reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cyclotomic::CycInt;
use crate::dwork::{exp_series, x_of_eps, x_of_eps_power_form, zeta_of_gamma, DworkSeries};
use crate::error::{Error, Result};
use crate::extension::{build_extension, enumerate_eps, lattice_check, selfdual_gram, EpsilonClass, WeakExtension};
use crate::gauss::{
    gauss_closed_form, magnitude, norm_sample_check, tau_def_with, tau_star_from, tau_star_trivial, vchi_from_eps,
    UnitReps, WeakCharacter,
};
use crate::padic::zp::teichmuller_zp;
use crate::padic::{pow_padic, Level, PadicElem, Tower, Val};
use crate::resolvent::{fourier_inversion, norm_resolvent, norm_x_check, resolvent_check, RootOfUnityExponent};

/// Wall-clock timer; a no-op where the platform has no clock.
#[derive(Clone, Copy)]
struct Instant(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Instant {
    fn now() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Instant(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Instant();
    }

    fn elapsed_ms(self) -> Option<u64> {
        #[cfg(not(target_arch = "wasm32"))]
        return Some(self.0.elapsed().as_millis() as u64);
        #[cfg(target_arch = "wasm32")]
        return None;
    }
}

/// Extra digits carried beyond the requested precision.
pub const GUARD: i64 = 6;

/// Report format version.
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Dwork,
    Extension,
    Selfdual,
    Resolvent,
    Norm,
    Cft,
    Gauss,
    Product,
}

impl Group {
    pub const ALL: [Group; 8] = [
        Group::Dwork,
        Group::Extension,
        Group::Selfdual,
        Group::Resolvent,
        Group::Norm,
        Group::Cft,
        Group::Gauss,
        Group::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Dwork => "dwork",
            Group::Extension => "extension",
            Group::Selfdual => "selfdual",
            Group::Resolvent => "resolvent",
            Group::Norm => "norm",
            Group::Cft => "cft",
            Group::Gauss => "gauss",
            Group::Product => "product",
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check group '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsSelect {
    All,
    /// 1-based index into the enumeration of classes.
    Index(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub p: u32,
    pub d: usize,
    pub eps: EpsSelect,
    /// Target precision `N` in base-`p` digits.
    pub precision: i64,
    pub checks: BTreeSet<Group>,
    pub seed: u64,
    /// Largest residue field size `p^d` accepted.
    pub ceiling: u64,
    pub stretch: bool,
}

impl RunConfig {
    pub fn new(p: u32, d: usize) -> Self {
        RunConfig {
            p,
            d,
            eps: EpsSelect::All,
            precision: 8,
            checks: Group::ALL.into_iter().collect(),
            seed: 1,
            ceiling: 125,
            stretch: false,
        }
    }

    pub fn cap(&self) -> i64 {
        self.precision + GUARD
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Ambiguous,
    Skipped,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Ambiguous => "ambiguous",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Params {
    pub p: u32,
    pub d: usize,
    pub eps: Option<usize>,
    pub j: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub anchor: String,
    pub params: Params,
    pub status: Status,
    /// Achieved residual precision, or "exact".
    pub precision: String,
    pub witness: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<u64>,
}

impl CheckReport {
    pub fn group(&self) -> Option<Group> {
        self.check.split('.').next().and_then(|g| g.parse().ok())
    }
}

fn val_str(v: Val) -> String {
    if *v.denom() == 1 {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn capped(v: Val, cap: i64) -> String {
    val_str(v.min(Val::from(cap)))
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    eps: Option<usize>,
    out: Vec<CheckReport>,
}

impl Ctx<'_> {
    fn push(&mut self, check: &str, anchor: &str, j: Option<u32>, status: Status, precision: String, witness: Value, t0: Instant) {
        self.out.push(CheckReport {
            check: check.to_string(),
            anchor: anchor.to_string(),
            params: Params { p: self.cfg.p, d: self.cfg.d, eps: self.eps, j },
            status,
            precision,
            witness,
            ms: t0.elapsed_ms(),
        });
    }

    fn error(&mut self, check: &str, anchor: &str, j: Option<u32>, e: &Error, t0: Instant) {
        self.push(check, anchor, j, Status::Fail, "0".into(), json!({ "error": e.to_string() }), t0);
    }
}

/// Complete result of one run.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub reports: Vec<CheckReport>,
    pub exit_code: i32,
}

pub fn exit_code(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(|r| r.status == Status::Fail) {
        1
    } else if reports.iter().any(|r| r.status == Status::Ambiguous) {
        2
    } else {
        0
    }
}

/// Runs every selected check for the configured `(p, d)` and `eps` range.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteResult> {
    crate::padic::zp::require_odd_prime(cfg.p)?;
    if cfg.d == 0 {
        return Err(Error::InvalidDegree);
    }
    if cfg.precision < 4 {
        return Err(Error::InvalidArgument("precision must be at least 4".into()));
    }
    let size = (cfg.p as u64).checked_pow(cfg.d as u32);
    if size.is_none_or(|q| q > cfg.ceiling) {
        let t0 = Instant::now();
        let mut ctx = Ctx { cfg, eps: None, out: Vec::new() };
        ctx.push(
            "resource",
            "residue field size p^d within the configured ceiling",
            None,
            Status::Skipped,
            "0".into(),
            json!({ "ceiling": cfg.ceiling }),
            t0,
        );
        return Ok(SuiteResult { reports: ctx.out, exit_code: 3 });
    }
    let cap = cfg.cap();
    let (base, eta) = Tower::unramified(cfg.p, cfg.d, cap, cfg.seed)?;
    let series = DworkSeries::new(cfg.p, cap)?;
    let classes = enumerate_eps(&base)?;
    let chosen: Vec<&EpsilonClass> = match cfg.eps {
        EpsSelect::All => classes.iter().collect(),
        EpsSelect::Index(i) => {
            let c = classes.get(i.wrapping_sub(1)).ok_or_else(|| {
                Error::InvalidArgument(format!("eps index {i} out of range 1..={}", classes.len()))
            })?;
            vec![c]
        }
    };
    let mut reports = Vec::new();
    if cfg.checks.contains(&Group::Dwork) {
        reports.extend(dwork_checks(cfg, &base, &eta, &series, &chosen));
    }
    #[cfg(feature = "parallel")]
    let per_eps: Vec<Vec<CheckReport>> =
        chosen.par_iter().map(|e| eps_checks(cfg, &base, &eta, &series, e)).collect();
    #[cfg(not(feature = "parallel"))]
    let per_eps: Vec<Vec<CheckReport>> =
        chosen.iter().map(|e| eps_checks(cfg, &base, &eta, &series, e)).collect();
    reports.extend(per_eps.into_iter().flatten());
    if cfg.stretch {
        let mut ctx = Ctx { cfg, eps: None, out: Vec::new() };
        ctx.push(
            "resolvent.stretch",
            "norm-resolvent as a literal product over a transversal in the Galois closure",
            None,
            Status::Skipped,
            "0".into(),
            json!({ "reason": "explicit Galois closure is not constructed" }),
            Instant::now(),
        );
        reports.extend(ctx.out);
    }
    reports.retain(|r| r.group().is_none_or(|g| cfg.checks.contains(&g)) || r.status == Status::Skipped);
    let code = exit_code(&reports);
    Ok(SuiteResult { reports, exit_code: code })
}

fn dwork_checks(
    cfg: &RunConfig,
    base: &Arc<Tower>,
    eta: &PadicElem,
    s: &DworkSeries,
    chosen: &[&EpsilonClass],
) -> Vec<CheckReport> {
    let mut ctx = Ctx { cfg, eps: None, out: Vec::new() };
    let n = cfg.precision;
    let p = cfg.p;

    let t0 = Instant::now();
    let e0 = s.coeff_elem(base, 0).and_then(|c| c.agreement(&PadicElem::one(base, Level::Kprime)));
    let e1 = s.coeff_elem(base, 1).and_then(|c| c.agreement(&PadicElem::gamma(base)));
    let mut bound_ok = true;
    for k in 0..=s.truncation() {
        if let Some(o) = s.ord(k) {
            bound_ok &= o >= Val::new(k as i64 * (p as i64 - 1), (p * p) as i64);
        }
    }
    match (e0, e1) {
        (Ok(a), Ok(b)) => {
            let ok = a >= Val::from(cfg.cap()) && b >= Val::from(cfg.cap()) && bound_ok;
            ctx.push(
                "dwork.coefficients",
                "e_0 = 1, e_1 = gamma, ord_p(e_n) >= n(p-1)/p^2",
                None,
                Status::from_bool(ok),
                "exact".into(),
                json!({ "truncation": s.truncation(), "bound_holds": bound_ok }),
                t0,
            );
        }
        (Err(e), _) | (_, Err(e)) => ctx.error("dwork.coefficients", "e_0 = 1, e_1 = gamma", None, &e, t0),
    }

    let t0 = Instant::now();
    let anchor = "zeta = E_gamma(1) is a primitive p-th root of unity";
    match zeta_check(base, s) {
        Ok((res, ok)) => ctx.push(
            "dwork.zeta",
            anchor,
            None,
            Status::from_bool(ok && res >= Val::from(n - 1)),
            capped(res, cfg.cap()),
            json!({ "primitive": ok }),
            t0,
        ),
        Err(e) => ctx.error("dwork.zeta", anchor, None, &e, t0),
    }

    let t0 = Instant::now();
    let anchor = "E_gamma(mu X) = E_gamma(X)^mu for mu in mu_{p-1}";
    match mu_power_check(base, s, cfg.seed, 10) {
        Ok((res, cases)) => ctx.push(
            "dwork.mu_power",
            anchor,
            None,
            Status::from_bool(res >= Val::from(n - 2)),
            capped(res, cfg.cap()),
            json!({ "cases": cases }),
            t0,
        ),
        Err(e) => ctx.error("dwork.mu_power", anchor, None, &e, t0),
    }

    let t0 = Instant::now();
    let anchor = "E_gamma(a)^p = exp(p gamma a) exp(-p gamma a^p)";
    match pth_power_check(base, eta, s) {
        Ok(res) => ctx.push(
            "dwork.pth_power",
            anchor,
            None,
            Status::from_bool(res >= Val::from(n - 2)),
            capped(res, cfg.cap()),
            json!({}),
            t0,
        ),
        Err(e) => ctx.error("dwork.pth_power", anchor, None, &e, t0),
    }

    for e in chosen {
        let t0 = Instant::now();
        ctx.eps = Some(e.index);
        let anchor = "prod_j E_gamma(eta^{p^j})^{u_j} = prod_j E_gamma(u_j eta^{p^j})";
        match product_forms_check(s, eta, e) {
            Ok((res, scaled)) => ctx.push(
                "dwork.product_forms",
                anchor,
                None,
                Status::from_bool(res >= Val::from(n - 2) && scaled >= Val::from(n - 2)),
                capped(res.min(scaled), cfg.cap()),
                json!({ "forms": val_str(res), "scaled_class": val_str(scaled) }),
                t0,
            ),
            Err(err) => ctx.error("dwork.product_forms", anchor, None, &err, t0),
        }
    }
    ctx.out
}

fn zeta_check(base: &Arc<Tower>, s: &DworkSeries) -> Result<(Val, bool)> {
    let zeta = zeta_of_gamma(s, base)?;
    let one = PadicElem::one(base, Level::Kprime);
    let p = base.p();
    let order = zeta.pow(p as u64).agreement(&one)?;
    let mut sum = PadicElem::zero(base, Level::Kprime);
    for k in 0..p {
        sum = &sum + &zeta.pow(k as u64);
    }
    let first_order = (&(&zeta - &one) - &PadicElem::gamma(base)).valuation() >= Val::new(2, p as i64 - 1);
    let primitive = zeta.agreement(&one)? == Val::new(1, p as i64 - 1) && first_order;
    Ok((order.min(sum.valuation()), primitive))
}

fn random_unit(base: &Arc<Tower>, rng: &mut ChaCha8Rng) -> PadicElem {
    let p = base.p() as u64;
    let d = base.degree();
    let cap = base.cap();
    loop {
        let digits: Vec<BigInt> = (0..d)
            .map(|_| {
                let mut acc = BigInt::from(0);
                for _ in 0..cap {
                    acc = acc * p + rng.gen_range(0..p);
                }
                acc
            })
            .collect();
        let u = PadicElem::from_parts(base, Level::K, 0, cap, digits);
        if u.valuation() == Val::from(0) {
            return u;
        }
    }
}

fn mu_power_check(base: &Arc<Tower>, s: &DworkSeries, seed: u64, samples: usize) -> Result<(Val, usize)> {
    let p = base.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d75);
    let mut worst = Val::from(i64::MAX / 4);
    let mut cases = 0;
    let units: Vec<PadicElem> = (0..samples).map(|_| random_unit(base, &mut rng)).collect();
    for a in 1..p {
        let mu = teichmuller_zp(p, a as i64, base.cap() + 8)?;
        let mu_elem = PadicElem::from_bigint(base, Level::K, &mu.value);
        for u in &units {
            let lhs = s.eval(&(&mu_elem * u))?;
            let rhs = pow_padic(&s.eval(u)?, &mu)?;
            worst = worst.min(lhs.agreement(&rhs)?);
            cases += 1;
        }
    }
    Ok((worst, cases))
}

fn pth_power_check(base: &Arc<Tower>, eta: &PadicElem, s: &DworkSeries) -> Result<Val> {
    let p = base.p() as u64;
    let pg = PadicElem::gamma(base).mul_p_pow(1);
    let mut worst = Val::from(i64::MAX / 4);
    for k in 0..3 {
        let a = &eta.embed(Level::Kprime)? + &PadicElem::from_int(base, Level::Kprime, k);
        let lhs = s.eval(&a)?.pow(p);
        let rhs = &exp_series(&(&pg * &a))? * &exp_series(&-&(&pg * &a.pow(p)))?;
        worst = worst.min(lhs.agreement(&rhs)?);
    }
    Ok(worst)
}

/// Agreement of the two product forms, and of `x_{c eps}` with
/// `x_eps^{omega(c)}` for the smallest `c` generating `F_p^x`.
fn product_forms_check(s: &DworkSeries, eta: &PadicElem, e: &EpsilonClass) -> Result<(Val, Val)> {
    let a = x_of_eps(s, eta, &e.normal)?;
    let b = x_of_eps_power_form(s, eta, &e.normal)?;
    let p = s.p();
    let c = crate::padic::zp::primitive_root(p) as u64;
    let scaled: Vec<u64> = e.normal.iter().map(|&u| u * c % p as u64).collect();
    let xc = x_of_eps(s, eta, &scaled)?;
    let om = teichmuller_zp(p, c as i64, eta.tower().cap() + 8)?;
    let xp = pow_padic(&a, &om)?;
    Ok((a.agreement(&b)?, xc.agreement(&xp)?))
}

fn eps_checks(
    cfg: &RunConfig,
    base: &Arc<Tower>,
    eta: &PadicElem,
    s: &DworkSeries,
    e: &EpsilonClass,
) -> Vec<CheckReport> {
    let mut ctx = Ctx { cfg, eps: Some(e.index), out: Vec::new() };
    let t0 = Instant::now();
    let anchor = "L = K'(x_eps^{1/p}) with h(T) = zeta T of order p and delta(T) = T^mu of order p-1";
    let w = match build_extension(base, eta, s, e, cfg.precision) {
        Ok(w) => w,
        Err(err) => {
            ctx.error("extension.build", anchor, None, &err, t0);
            return ctx.out;
        }
    };
    let o = &w.orders;
    let res = o.h_order.min(o.delta_order).min(o.delta_kummer).min(o.commute);
    ctx.push(
        "extension.build",
        anchor,
        None,
        Status::Pass,
        capped(res, cfg.cap()),
        json!({
            "eps": e.label(),
            "trace_eps_mod_p2": e.trace_mod_p2(cfg.p),
            "h_order": val_str(o.h_order),
            "delta_order": val_str(o.delta_order),
            "delta_T_pow_p_eq_x_mu": val_str(o.delta_kummer),
            "delta_h_commute": val_str(o.commute),
            "faithful": o.faithful,
            "v_M_alpha": 1 - cfg.p as i64,
        }),
        t0,
    );
    selfdual_reports(&mut ctx, &w);
    let res_ok = resolvent_reports(&mut ctx, &w);
    let norm_ok = norm_reports(&mut ctx, &w);
    let vchi = cft_reports(&mut ctx, &w);
    if let Some(v) = vchi {
        gauss_and_product(&mut ctx, &w, &v, &res_ok, norm_ok);
    }
    ctx.out
}

fn selfdual_reports(ctx: &mut Ctx<'_>, w: &WeakExtension) {
    let n = ctx.cfg.precision;
    let cap = ctx.cfg.cap();
    let t0 = Instant::now();
    let anchor = "Tr_{M/K}(h^i(alpha_M) h^j(alpha_M)) = [i = j]";
    match selfdual_gram(w, w.alpha()) {
        Ok(g) => ctx.push(
            "selfdual.gram",
            anchor,
            None,
            Status::from_bool(g.pass),
            capped(g.residual, cap),
            json!({ "symmetric": g.symmetric, "circulant": g.circulant }),
            t0,
        ),
        Err(e) => ctx.error("selfdual.gram", anchor, None, &e, t0),
    }
    let t0 = Instant::now();
    let anchor = "O_K[H] alpha_M = p_M^{-(p-1)}";
    match lattice_check(w, w.alpha()) {
        Ok(l) => ctx.push(
            "selfdual.lattice",
            anchor,
            None,
            Status::from_bool(l.pass),
            capped(l.residual, cap),
            json!({ "det_valuation": l.det_valuation.map(val_str) }),
            t0,
        ),
        Err(e) => ctx.error("selfdual.lattice", anchor, None, &e, t0),
    }
    let t0 = Instant::now();
    let anchor = "v_M(different of M/K) = 2(p-1)";
    match w.different_valuation() {
        Ok(v) => ctx.push(
            "selfdual.different",
            anchor,
            None,
            Status::from_bool(v == Val::from(2 * (ctx.cfg.p as i64 - 1))),
            "exact".into(),
            json!({ "v_M": val_str(v) }),
            t0,
        ),
        Err(e) => ctx.error("selfdual.different", anchor, None, &e, t0),
    }
    let t0 = Instant::now();
    let anchor = "p alpha_M and alpha_M + 1 are not self-dual generators of p_M^{-(p-1)}";
    match perturbations(w) {
        Ok(pert) => {
            let ok = !pert.scaled_gram && !pert.scaled_lattice && !pert.shifted_gram;
            ctx.push(
                "selfdual.perturbation",
                anchor,
                None,
                Status::from_bool(ok),
                val_str(Val::from(n - 3)),
                json!({
                    "p_alpha": { "gram": pert.scaled_gram, "lattice": pert.scaled_lattice,
                                 "det_valuation": pert.scaled_det.map(val_str) },
                    "alpha_plus_1": { "gram": pert.shifted_gram, "lattice": pert.shifted_lattice },
                }),
                t0,
            );
        }
        Err(e) => ctx.error("selfdual.perturbation", anchor, None, &e, t0),
    }
}

/// Which checks pass for the perturbed generators.
#[derive(Clone, Debug)]
pub struct Perturbations {
    pub scaled_gram: bool,
    pub scaled_lattice: bool,
    pub scaled_det: Option<Val>,
    pub shifted_gram: bool,
    pub shifted_lattice: bool,
}

pub fn perturbations(w: &WeakExtension) -> Result<Perturbations> {
    let pa = w.alpha().mul_p_pow(1);
    let a1 = w.alpha() + &PadicElem::one(w.tower(), Level::L);
    let ls = lattice_check(w, &pa)?;
    Ok(Perturbations {
        scaled_gram: selfdual_gram(w, &pa)?.pass,
        scaled_lattice: ls.pass,
        scaled_det: ls.det_valuation,
        shifted_gram: selfdual_gram(w, &a1)?.pass,
        shifted_lattice: lattice_check(w, &a1)?.pass,
    })
}

fn resolvent_reports(ctx: &mut Ctx<'_>, w: &WeakExtension) -> Vec<bool> {
    let p = w.p();
    let cap = ctx.cfg.cap();
    let mut oks = Vec::new();
    for j in 0..p {
        let t0 = Instant::now();
        let anchor = "(alpha_M | chi^j) = delta^s(T) = (x^{1/p})^{mu^s}, mu^s = j mod p; 1 for j = 0";
        match resolvent_check(w, j) {
            Ok(c) => {
                oks.push(c.pass);
                ctx.push(
                    "resolvent.closed_form",
                    anchor,
                    Some(j),
                    Status::from_bool(c.pass),
                    capped(c.residual.min(c.residual_series), cap),
                    json!({ "s": c.s, "vs_delta": val_str(c.residual), "vs_series": val_str(c.residual_series) }),
                    t0,
                );
            }
            Err(e) => {
                oks.push(false);
                ctx.error("resolvent.closed_form", anchor, Some(j), &e, t0);
            }
        }
    }
    let t0 = Instant::now();
    let anchor = "h^t(alpha_M) = (1/p) sum_j zeta^{jt} (alpha_M | chi^j)";
    match fourier_inversion(w) {
        Ok(v) => ctx.push(
            "resolvent.fourier",
            anchor,
            None,
            Status::from_bool(v >= Val::from(ctx.cfg.precision - 3)),
            capped(v, cap),
            json!({}),
            t0,
        ),
        Err(e) => ctx.error("resolvent.fourier", anchor, None, &e, t0),
    }
    oks
}

fn norm_reports(ctx: &mut Ctx<'_>, w: &WeakExtension) -> bool {
    let t0 = Instant::now();
    let anchor = "N_{K'/Q_p(zeta)}(x_eps) = zeta^{Tr(eps)}";
    let cap = ctx.cfg.cap();
    let perturbed = &w.x * &PadicElem::from_int(w.base(), Level::Kprime, 1 + ctx.cfg.p as i64);
    match (norm_x_check(w, None), norm_x_check(w, Some(&perturbed))) {
        (Ok(a), Ok(b)) => {
            ctx.push(
                "norm.x",
                anchor,
                None,
                Status::from_bool(a.pass && !b.pass),
                capped(a.residual, cap),
                json!({ "trace_eps_mod_p": w.eps.trace_mod_p, "perturbed_residual": val_str(b.residual),
                        "perturbed_pass": b.pass }),
                t0,
            );
            a.pass
        }
        (Err(e), _) | (_, Err(e)) => {
            ctx.error("norm.x", anchor, None, &e, t0);
            false
        }
    }
}

fn cft_reports(ctx: &mut Ctx<'_>, w: &WeakExtension) -> Option<crate::gauss::VchiResult> {
    let t0 = Instant::now();
    let anchor = "ker(chi) on U^1/U^2 is the norm hyperplane {u : Tr(u v_chi) = 0}, Tr(v_chi) = Tr(eps)";
    let v = match vchi_from_eps(w) {
        Ok(v) => v,
        Err(e) => {
            ctx.error("cft.vchi", anchor, None, &e, t0);
            return None;
        }
    };
    let samples = 2 * ctx.cfg.d + 2;
    let mut sample_ok = true;
    let mut ranks = Vec::new();
    for (i, c) in v.candidates.iter().enumerate() {
        match norm_sample_check(w, c, ctx.cfg.seed.wrapping_add(i as u64), samples) {
            Ok(s) => {
                sample_ok &= s.pass;
                ranks.push(s.rank);
            }
            Err(_) => sample_ok = false,
        }
    }
    let vbar: Vec<Vec<u64>> = v.candidates.iter().map(|c| c.residue().unwrap_or_default()).collect();
    ctx.push(
        "cft.vchi",
        anchor,
        None,
        Status::from_bool(sample_ok && v.p_is_norm),
        "2".into(),
        json!({
            "hyperplane_dim": v.hyperplane.len(),
            "line": v.line,
            "v_chi_mod_p": vbar,
            "ambiguous": v.ambiguous,
            "p_is_norm": v.p_is_norm,
            "fresh_samples": samples,
            "sample_ranks": ranks,
        }),
        t0,
    );
    Some(v)
}

/// Gauss-sum data of one candidate `v_chi`.
struct GaussLeg {
    closed_ok: Vec<bool>,
    magnitude_ok: Vec<bool>,
    log: Vec<Option<i64>>,
}

fn gauss_leg(w: &WeakExtension, vchi: &PadicElem) -> Result<GaussLeg> {
    let p = w.p();
    let d = w.d();
    let tr = w.eps.trace_mod_p2(p);
    let chi = WeakCharacter::new(w.base(), vchi.clone(), 1)?;
    let reps = UnitReps::new(w.base())?;
    let taus: Vec<CycInt> = (0..p).map(|j| tau_def_with(&chi.power(j), &reps)).collect::<Result<_>>()?;
    let q2 = CycInt::from_int(p, BigInt::from(p).pow(2 * d as u32));
    let mut leg = GaussLeg { closed_ok: Vec::new(), magnitude_ok: Vec::new(), log: Vec::new() };
    for j in 0..p {
        let c = chi.power(j);
        let star = tau_star_from(&c, &taus[j as usize], &taus[(2 * j % p) as usize])?;
        let closed = gauss_closed_form(&c, tr)?;
        leg.closed_ok.push(star == closed);
        leg.magnitude_ok.push(j == 0 || magnitude(&taus[j as usize])? == q2);
        leg.log.push(star.root_exponent());
    }
    Ok(leg)
}

fn gauss_and_product(
    ctx: &mut Ctx<'_>,
    w: &WeakExtension,
    v: &crate::gauss::VchiResult,
    res_ok: &[bool],
    norm_ok: bool,
) {
    let p = w.p();
    let t0 = Instant::now();
    let legs: Vec<Result<GaussLeg>> = v.candidates.iter().map(|c| gauss_leg(w, c)).collect();
    let anchor = "tau^*(chi^j - chi^{2j}) = chi^j(j^{-1}) xi^{-j Tr(eps)} and tau tau-bar = p^{2d}";
    let trivial_ok = tau_star_trivial(p) == CycInt::from_int(p, -1);
    for j in 0..p {
        let mut closed = true;
        let mut mag = true;
        let mut logs = Vec::new();
        let mut err = None;
        for leg in &legs {
            match leg {
                Ok(l) => {
                    closed &= l.closed_ok[j as usize];
                    mag &= l.magnitude_ok[j as usize];
                    logs.push(l.log[j as usize]);
                }
                Err(e) => err = Some(e.to_string()),
            }
        }
        if let Some(e) = err {
            ctx.push("gauss.closed_form", anchor, Some(j), Status::Fail, "0".into(), json!({ "error": e }), t0);
            continue;
        }
        let ok = closed && mag && (j != 0 || trivial_ok) && logs.iter().all(Option::is_some);
        ctx.push(
            "gauss.closed_form",
            anchor,
            Some(j),
            Status::from_bool(ok),
            "exact".into(),
            json!({ "closed_form": closed, "magnitude": mag, "tau_star_log": logs }),
            t0,
        );
    }

    // product of the two legs, per candidate scaling
    let t0 = Instant::now();
    let anchor = "N(alpha_M | chi^j) tau^*(chi^j - chi^{2j}) = 1";
    let mut all_j_pass = Vec::new();
    let mut per_j: Vec<Vec<(Option<i64>, i64, bool)>> = vec![Vec::new(); p as usize];
    for leg in legs.iter() {
        let mut every = true;
        for j in 0..p {
            let e = norm_resolvent(w, j, res_ok.get(j as usize).copied().unwrap_or(false), norm_ok)
                .map(|r| r.e)
                .ok();
            // the Gauss leg counts only once its closed form and magnitude hold
            let g = leg
                .as_ref()
                .ok()
                .filter(|l| l.closed_ok[j as usize] && l.magnitude_ok[j as usize])
                .and_then(|l| l.log[j as usize]);
            let ok = match (e, g) {
                (Some(e), Some(g)) => RootOfUnityExponent::new(p, e).add(RootOfUnityExponent::new(p, g)).is_one(),
                _ => false,
            };
            every &= ok;
            per_j[j as usize].push((e, g.unwrap_or(-1), ok));
        }
        all_j_pass.push(every);
    }
    let passing: Vec<u64> = v
        .candidates
        .iter()
        .zip(&all_j_pass)
        .filter(|(_, &ok)| ok)
        .map(|(c, _)| c.residue().map(|r| r[0]).unwrap_or(0))
        .collect();
    for j in 0..p {
        let entries = &per_j[j as usize];
        let status = if v.ambiguous {
            if entries.iter().any(|e| e.2) {
                Status::Ambiguous
            } else {
                Status::Fail
            }
        } else {
            Status::from_bool(entries.iter().all(|e| e.2))
        };
        let wit: Vec<Value> = entries
            .iter()
            .map(|(e, g, ok)| json!({ "norm_resolvent": e, "gauss_log": g, "sum_zero": ok }))
            .collect();
        ctx.push("product.identity", anchor, Some(j), status, "exact".into(), json!({ "candidates": wit }), t0);
    }
    if v.ambiguous {
        let n_pass = all_j_pass.iter().filter(|&&b| b).count();
        let status = if n_pass > 0 { Status::Ambiguous } else { Status::Fail };
        let cand: Vec<Value> = v
            .candidates
            .iter()
            .zip(&all_j_pass)
            .map(|(c, ok)| json!({ "v_chi_mod_p": c.residue().unwrap_or_default(), "all_j": ok }))
            .collect();
        ctx.push(
            "product.pinning",
            "some scaling of v_chi on its line satisfies the product identity for every j",
            None,
            status,
            "exact".into(),
            json!({ "candidates": cand, "passing": n_pass, "unique": n_pass == 1, "passing_first_coord": passing }),
            t0,
        );
    }
}

/// Digit-by-digit agreement of the results of checks at precisions `lo`
/// and `hi`, for one class: `(alpha_M, resolvents, Gram entries)`.
#[derive(Clone, Debug)]
pub struct MonotoneResult {
    pub alpha: Val,
    pub resolvents: Val,
    pub gram: Val,
    /// Absolute precision of the low-precision values.
    pub known: Val,
    pub checks_pass_both: bool,
}

pub fn precision_monotonicity(p: u32, d: usize, eps_index: usize, lo: i64, hi: i64, seed: u64) -> Result<MonotoneResult> {
    let run = |n: i64| -> Result<(WeakExtension, Vec<PadicElem>, Vec<Vec<PadicElem>>, bool)> {
        let (base, eta) = Tower::unramified(p, d, n + GUARD, seed)?;
        let s = DworkSeries::new(p, n + GUARD)?;
        let eps = enumerate_eps(&base)?;
        let e = eps.get(eps_index.wrapping_sub(1)).ok_or(Error::InvalidArgument("eps index".into()))?;
        let w = build_extension(&base, &eta, &s, e, n)?;
        let mut pass = true;
        let mut res = Vec::new();
        for j in 0..p {
            pass &= resolvent_check(&w, j)?.pass;
            res.push(crate::resolvent::resolvent(&w, j)?);
        }
        pass &= norm_x_check(&w, None)?.pass;
        let g = selfdual_gram(&w, w.alpha())?;
        pass &= g.pass && lattice_check(&w, w.alpha())?.pass;
        Ok((w, res, g.matrix, pass))
    };
    let (wl, rl, gl, pl) = run(lo)?;
    let (wh, rh, gh, ph) = run(hi)?;
    let alpha = wl.alpha().agreement_across(wh.alpha());
    let resolvents = rl.iter().zip(&rh).map(|(a, b)| a.agreement_across(b)).min().unwrap();
    let gram = gl
        .iter()
        .flatten()
        .zip(gh.iter().flatten())
        .map(|(a, b)| a.agreement_across(b))
        .min()
        .unwrap();
    let known = Val::from(wl.alpha().prec());
    Ok(MonotoneResult { alpha, resolvents, gram, known, checks_pass_both: pl && ph })
}

/// Both legs of the product identity for one `(eps, j)`, for each
/// candidate `v_chi`.
#[derive(Clone, Debug, Serialize)]
pub struct GaussCase {
    pub p: u32,
    pub d: usize,
    pub eps: usize,
    pub eps_normal: Vec<u64>,
    pub j: u32,
    pub trace_eps_mod_p2: i64,
    pub norm_resolvent: i64,
    pub candidates: Vec<GaussCandidate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussCandidate {
    pub v_chi_mod_p: Vec<u64>,
    /// `tau^*(chi^j - chi^{2j}) = xi^e`, when it is a root of unity.
    pub tau_star_log: Option<i64>,
    pub closed_form_log: Option<i64>,
    pub product_is_one: bool,
}

pub fn gauss_case(p: u32, d: usize, eps_index: usize, j: u32, precision: i64, seed: u64) -> Result<GaussCase> {
    let (base, eta) = Tower::unramified(p, d, precision + GUARD, seed)?;
    let s = DworkSeries::new(p, precision + GUARD)?;
    let classes = enumerate_eps(&base)?;
    let e = classes
        .get(eps_index.wrapping_sub(1))
        .ok_or_else(|| Error::InvalidArgument(format!("eps index {eps_index} out of range 1..={}", classes.len())))?;
    let w = build_extension(&base, &eta, &s, e, precision)?;
    let j = j % p;
    let res_ok = resolvent_check(&w, j)?.pass;
    let norm_ok = norm_x_check(&w, None)?.pass;
    let nr = norm_resolvent(&w, j, res_ok, norm_ok)?;
    let v = vchi_from_eps(&w)?;
    let reps = UnitReps::new(&base)?;
    let tr = e.trace_mod_p2(p);
    let mut candidates = Vec::new();
    for c in &v.candidates {
        let chi = WeakCharacter::new(&base, c.clone(), j)?;
        let t1 = tau_def_with(&chi, &reps)?;
        let t2 = tau_def_with(&chi.power(2), &reps)?;
        let star = tau_star_from(&chi, &t1, &t2)?.root_exponent();
        let closed = gauss_closed_form(&chi, tr)?.root_exponent();
        let product_is_one = star.is_some_and(|g| nr.add(RootOfUnityExponent::new(p, g)).is_one());
        candidates.push(GaussCandidate {
            v_chi_mod_p: c.residue()?,
            tau_star_log: star,
            closed_form_log: closed,
            product_is_one,
        });
    }
    Ok(GaussCase {
        p,
        d,
        eps: e.index,
        eps_normal: e.normal.clone(),
        j,
        trace_eps_mod_p2: tr,
        norm_resolvent: nr.e,
        candidates,
    })
}

/// Renders reports as text or versioned JSON. `golden` drops timings.
pub fn emit_report(cfg: Option<&RunConfig>, reports: &[CheckReport], format: Format, golden: bool) -> String {
    let reports: Vec<CheckReport> = reports
        .iter()
        .cloned()
        .map(|mut r| {
            if golden {
                r.ms = None;
            }
            r
        })
        .collect();
    match format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("version".into(), json!(REPORT_VERSION));
            if let Some(c) = cfg {
                doc.insert(
                    "config".into(),
                    json!({
                        "p": c.p, "d": c.d, "precision": c.precision, "seed": c.seed,
                        "eps": match c.eps { EpsSelect::All => json!("all"), EpsSelect::Index(i) => json!(i) },
                        "checks": c.checks.iter().map(|g| g.name()).collect::<Vec<_>>(),
                    }),
                );
            }
            doc.insert("reports".into(), serde_json::to_value(&reports).expect("serializable"));
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                let eps = r.params.eps.map(|e| format!("eps={e}")).unwrap_or_default();
                let j = r.params.j.map(|j| format!("j={j}")).unwrap_or_default();
                let _ = write!(
                    s,
                    "{:<9} {:<24} p={} d={} {:<6} {:<4} prec={:<6} {}",
                    r.status.label().to_uppercase(),
                    r.check,
                    r.params.p,
                    r.params.d,
                    eps,
                    j,
                    r.precision,
                    r.witness
                );
                if let Some(ms) = r.ms {
                    let _ = write!(s, " ({ms} ms)");
                }
                s.push('\n');
            }
            let count = |st: Status| reports.iter().filter(|r| r.status == st).count();
            let _ = writeln!(
                s,
                "{} checks: {} pass, {} fail, {} ambiguous, {} skipped",
                reports.len(),
                count(Status::Pass),
                count(Status::Fail),
                count(Status::Ambiguous),
                count(Status::Skipped)
            );
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q3_suite_passes() {
        let r = run_suite(&RunConfig::new(3, 1)).unwrap();
        let bad: Vec<_> = r.reports.iter().filter(|x| x.status != Status::Pass).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert_eq!(r.exit_code, 0);
    }

    #[test]
    fn ceiling_gives_exit_three() {
        let mut c = RunConfig::new(7, 3);
        c.ceiling = 125;
        let r = run_suite(&c).unwrap();
        assert_eq!(r.exit_code, 3);
        assert_eq!(r.reports[0].status, Status::Skipped);
    }

    #[test]
    fn exit_code_mapping() {
        let mk = |s| CheckReport {
            check: "x".into(),
            anchor: String::new(),
            params: Params { p: 3, d: 1, eps: None, j: None },
            status: s,
            precision: "0".into(),
            witness: json!({}),
            ms: None,
        };
        assert_eq!(exit_code(&[]), 0);
        assert_eq!(exit_code(&[mk(Status::Pass)]), 0);
        assert_eq!(exit_code(&[mk(Status::Pass), mk(Status::Ambiguous)]), 2);
        assert_eq!(exit_code(&[mk(Status::Fail), mk(Status::Ambiguous)]), 1);
    }

    #[test]
    fn empty_json_report() {
        let s = emit_report(None, &[], Format::Json, true);
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["version"], json!(1));
        assert_eq!(v["reports"], json!([]));
    }
}
