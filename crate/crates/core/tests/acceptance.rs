//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use weakram_core::dwork::DworkSeries;
use weakram_core::padic::zp::{inv_mod, pow_p};
use weakram_core::resolvent::mu_s_of_j;
use weakram_core::verify::{precision_monotonicity, run_suite, CheckReport, RunConfig, Status};
use weakram_core::Val;

const GRID: [(u32, usize); 5] = [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)];
const N: i64 = 8;
const N_HIGH: i64 = 12;

struct Grid {
    runs: Vec<((u32, usize), Vec<CheckReport>)>,
    elapsed: Duration,
}

impl Grid {
    fn run() -> Self {
        let t0 = Instant::now();
        let runs = GRID
            .iter()
            .map(|&(p, d)| {
                let mut cfg = RunConfig::new(p, d);
                cfg.precision = N;
                ((p, d), run_suite(&cfg).expect("suite runs").reports)
            })
            .collect();
        Grid { runs, elapsed: t0.elapsed() }
    }

    fn with_id<'a>(&'a self, id: &'a str) -> impl Iterator<Item = (&'a (u32, usize), &'a CheckReport)> + 'a {
        self.runs.iter().flat_map(move |(k, r)| r.iter().filter(move |c| c.check == id).map(move |c| (k, c)))
    }

    /// `(count, failures)` over every report with the given id.
    fn tally(&self, ids: &[&str], ok: impl Fn(&CheckReport) -> bool) -> (usize, Vec<String>) {
        let mut n = 0;
        let mut bad = Vec::new();
        for id in ids {
            for ((p, d), c) in self.with_id(id) {
                n += 1;
                if !ok(c) {
                    bad.push(format!("{id} p={p} d={d} eps={:?} j={:?}", c.params.eps, c.params.j));
                }
            }
        }
        (n, bad)
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_tally(what: &str, (n, bad): (usize, Vec<String>)) -> Outcome {
    if n == 0 {
        return Outcome { pass: false, detail: format!("no {what} were run") };
    }
    if bad.is_empty() {
        Outcome { pass: true, detail: format!("{n} {what}") }
    } else {
        Outcome { pass: false, detail: format!("{} of {n} {what} failed: {}", bad.len(), bad.join("; ")) }
    }
}

fn criterion_1(g: &Grid) -> Outcome {
    let (n, bad) = g.tally(&["product.identity"], |c| c.status != Status::Fail);
    let unambiguous = g.with_id("product.identity").filter(|(_, c)| c.status == Status::Pass).count();
    let mut out = from_tally("product checks", (n, bad));
    let fast = g.elapsed < Duration::from_secs(60);
    out.pass &= fast && unambiguous > 0;
    out.detail = format!("{}; {unambiguous} exact on unambiguous classes; grid time {:.1?} (limit 60 s)", out.detail, g.elapsed);
    out
}

fn criterion_2(g: &Grid) -> Outcome {
    let mut n = 0;
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for ((p, d), c) in g.with_id("product.pinning") {
        n += 1;
        let passing = c.witness["passing"].as_u64().unwrap_or(0);
        if c.status != Status::Ambiguous || passing == 0 {
            bad.push(format!("p={p} d={d} eps={:?}", c.params.eps));
        }
        let unique = if passing == 1 { "unique" } else { "not unique" };
        notes.push(format!("p={p} d={d} eps={}: {passing}/{} scalings pass ({unique})", c.params.eps.unwrap_or(0), p - 1));
    }
    // ambiguity must occur exactly for d >= 2
    let d1_ambiguous = g.with_id("product.pinning").any(|((_, d), _)| *d == 1);
    if d1_ambiguous {
        bad.push("ambiguous class with d = 1".into());
    }
    let mut out = from_tally("ambiguous classes", (n, bad));
    out.detail = format!("{}; {}", out.detail, notes.join(", "));
    out
}

fn criterion_3(g: &Grid) -> Outcome {
    let t = g.tally(&["gauss.closed_form"], |c| {
        c.status == Status::Pass && c.witness["closed_form"] == true && c.witness["magnitude"] == true
    });
    from_tally("Gauss sum checks (closed form and magnitude)", t)
}

fn criterion_4(g: &Grid) -> Outcome {
    let t = g.tally(&["resolvent.closed_form"], |c| c.status == Status::Pass);
    from_tally("resolvent checks at precision >= N-3", t)
}

fn criterion_5(g: &Grid) -> Outcome {
    let t = g.tally(&["norm.x"], |c| c.status == Status::Pass);
    from_tally("norm checks at precision >= N-2", t)
}

fn criterion_6(g: &Grid) -> Outcome {
    let mut out = from_tally(
        "Gram and lattice checks",
        g.tally(&["selfdual.gram", "selfdual.lattice"], |c| c.status == Status::Pass),
    );
    // every perturbation sub-check must fail, taken literally
    let mut n = 0;
    let mut survivors = Vec::new();
    for ((p, d), c) in g.with_id("selfdual.perturbation") {
        n += 1;
        let w = &c.witness;
        for (key, label) in [("p_alpha", "p*alpha"), ("alpha_plus_1", "alpha+1")] {
            for check in ["gram", "lattice"] {
                if w[key][check] != false {
                    survivors.push(format!("{label} {check} (p={p} d={d} eps={})", c.params.eps.unwrap_or(0)));
                }
            }
        }
        let pv = w["p_alpha"]["det_valuation"].as_str().unwrap_or("?").to_string();
        if pv != p.to_string() {
            survivors.push(format!("p*alpha det valuation {pv} != {p}"));
        }
    }
    if n == 0 {
        survivors.push("no perturbation checks ran".into());
    }
    out.pass &= survivors.is_empty();
    if survivors.is_empty() {
        out.detail = format!("{}; {n} perturbation sets all rejected", out.detail);
    } else {
        out.detail = format!(
            "{}; perturbations that were not rejected: {} of {} sub-checks: {}",
            out.detail,
            survivors.len(),
            4 * n,
            survivors.join(", ")
        );
    }
    out
}

fn criterion_7(g: &Grid) -> Outcome {
    let mut out = from_tally(
        "Dwork checks",
        g.tally(
            &["dwork.coefficients", "dwork.zeta", "dwork.mu_power", "dwork.pth_power", "dwork.product_forms"],
            |c| c.status == Status::Pass,
        ),
    );
    let samples: Vec<u64> = g.with_id("dwork.mu_power").map(|(_, c)| c.witness["cases"].as_u64().unwrap_or(0)).collect();
    let mut bound_fail = Vec::new();
    for p in [3u32, 5, 7] {
        let s = DworkSeries::new(p, N).unwrap();
        for n in 0..=s.truncation() {
            if let Some(o) = s.ord(n) {
                if o < Val::new(n as i64 * (p as i64 - 1), (p * p) as i64) {
                    bound_fail.push(format!("p={p} n={n}"));
                }
            }
        }
    }
    // 10 random units for every mu in mu_{p-1}
    let enough = g
        .with_id("dwork.mu_power")
        .zip(&samples)
        .all(|(((p, _), _), &k)| k >= 10 * (*p as u64 - 1));
    out.pass &= bound_fail.is_empty() && enough;
    out.detail = format!("{}; mu-power cases per grid point {samples:?}; valuation bound violations {}", out.detail, bound_fail.len());
    out
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut n = 0;
    let mut bad = Vec::new();
    for p in [3u32, 5, 7, 11, 13] {
        let m = pow_p(p, 2);
        for j in 1..p {
            n += 1;
            match mu_s_of_j(p, j) {
                Ok((_, mu_s)) => {
                    let jj = num_bigint::BigInt::from(j);
                    let jp = jj.modpow(&num_bigint::BigInt::from(p - 1), &m);
                    let inv = inv_mod(&jp, &m).unwrap();
                    let want = ((jj * (num_bigint::BigInt::from(2) - inv)) % &m + &m) % &m;
                    if want != num_bigint::BigInt::from(mu_s) {
                        bad.push(format!("p={p} j={j}"));
                    }
                }
                Err(e) => bad.push(format!("p={p} j={j}: {e}")),
            }
        }
    }
    let el = t0.elapsed();
    let mut out = from_tally("congruences", (n, bad));
    out.pass &= el < Duration::from_secs(1);
    out.detail = format!("{} in {el:.1?} (limit 1 s)", out.detail);
    out
}

fn criterion_9(g: &Grid) -> Outcome {
    let t = g.tally(&["cft.vchi"], |c| c.status == Status::Pass);
    from_tally("norm hyperplane checks on fresh samples", t)
}

fn criterion_10() -> Outcome {
    let mut n = 0;
    let mut bad = Vec::new();
    let mut worst: Option<Val> = None;
    for (p, d) in GRID {
        let classes = ((p as usize).pow(d as u32) - 1) / (p as usize - 1);
        for eps in 1..=classes {
            n += 1;
            match precision_monotonicity(p, d, eps, N, N_HIGH, 1) {
                Ok(m) => {
                    let agree = m.alpha.min(m.resolvents).min(m.gram);
                    worst = Some(worst.map_or(agree, |w| w.min(agree)));
                    if !m.checks_pass_both || m.alpha < m.known || m.resolvents < Val::from(N) || m.gram < Val::from(N) {
                        bad.push(format!("p={p} d={d} eps={eps}: {m:?}"));
                    }
                }
                Err(e) => bad.push(format!("p={p} d={d} eps={eps}: {e}")),
            }
        }
    }
    let mut out = from_tally("classes re-run at N=12", (n, bad));
    if let Some(w) = worst {
        out.detail = format!("{}; minimum digit agreement {w}", out.detail);
    }
    out
}

fn main() -> ExitCode {
    let grid = Grid::run();
    let results = [
        criterion_1(&grid),
        criterion_2(&grid),
        criterion_3(&grid),
        criterion_4(&grid),
        criterion_5(&grid),
        criterion_6(&grid),
        criterion_7(&grid),
        criterion_8(),
        criterion_9(&grid),
        criterion_10(),
    ];
    println!();
    for (i, r) in results.iter().enumerate() {
        println!("criterion {:>2}: {}  {}", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("\nacceptance: {} passed, {failed} failed\n", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
