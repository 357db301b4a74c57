//! End-to-end acceptance checks. Runs every criterion, prints one line each,
//! and exits nonzero if any failed.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use doslb::environment::{NoiseModel, RngState};
use doslb::estimation::{self, GramState, RegionGeometry, Target};
use doslb::gaps::{self, Bis};
use doslb::harness::cli::run_cli;
use doslb::harness::{run_all, ExperimentConfig, GeometrySetting, Run, RunSetup};
use doslb::instance;
use doslb::lp::{self, LpStatus};
use doslb::metrics::{self, RunSummary};
use doslb::numeric::Vector;
use doslb::policy::PolicyKind;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

fn example_config(horizon: usize, n_seeds: u64) -> ExperimentConfig {
    ExperimentConfig { horizon, seeds: seeds(n_seeds), delta: 0.01, eps: 0.01, noise: NoiseModel::gaussian(0.1f64.sqrt()), ..ExperimentConfig::default() }
}

fn mean_final(runs: &[Run], kind: PolicyKind, f: fn(&RunSummary) -> &[f64]) -> f64 {
    let rs: Vec<&Run> = runs.iter().filter(|r| r.policy == kind).collect();
    rs.iter().map(|r| RunSummary::last(f(&r.summary))).sum::<f64>() / rs.len() as f64
}

/// Rounds without an optimally associated set have error scale at least `xi`.
fn small_noise_implies_optimal(runs: &[Run], xi: f64) -> (usize, usize) {
    let mut bad = 0;
    let mut nonopt = 0;
    for r in runs {
        for rec in r.records.iter().filter(|rec| !rec.optimally_associated) {
            nonopt += 1;
            if rec.rho < xi - 1e-9 {
                bad += 1;
            }
        }
    }
    (nonopt, bad)
}

/// Largest ratio of the potential to its bound over every round of every run,
/// with the round where it occurs.
fn potential_ratio(runs: &[Run], setup: &RunSetup, radius: f64) -> (f64, usize) {
    let mut worst = (0.0f64, 0);
    for r in runs {
        for (t, p) in r.summary.potential.iter().enumerate() {
            let bound = metrics::potential_bound((t + 1) as f64, setup.instance.d, setup.lambda, radius);
            if p / bound > worst.0 {
                worst = (p / bound, t + 1);
            }
        }
    }
    worst
}

struct Shared {
    setup: RunSetup,
    doslb: Vec<Run>,
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = RngState::with_stream(707, 0);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..500 {
        let p = common::random_bounded_lp(&mut rng);
        let sol = lp::solve(&p).unwrap();
        let brute = common::brute_force_max(&p);
        match (sol.status, brute) {
            (LpStatus::Optimal, Some(b)) => {
                worst = worst.max((sol.value - b).abs());
                if (sol.value - b).abs() > 1e-7 || !lp::certificates(&p, &sol).holds(sol.value) {
                    failures += 1;
                }
            }
            _ => failures += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(failures == 0 && secs < 10.0, format!("500 LPs, max |simplex - vertices| = {worst:.2e}, {failures} failures, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let cfg = ExperimentConfig {
        horizon: 2000,
        seeds: seeds(200),
        delta: 0.05,
        noise: NoiseModel::gaussian(0.1),
        policies: vec![PolicyKind::Doslb],
        ..ExperimentConfig::default()
    };
    let setup = RunSetup::from_config(&cfg).unwrap();
    let runs = run_all(&setup, &cfg.policies, &cfg.seeds).unwrap();
    let covered = runs.iter().filter(|r| r.records.iter().all(|rec| rec.covered_ellipsoid)).count();
    let frac = covered as f64 / runs.len() as f64;
    outcome(frac >= 0.92, format!("coverage held on {covered}/200 seeds ({frac:.3}, need >= 0.92)"))
}

fn criterion_3(s: &Shared) -> Outcome {
    let ok = s.doslb.iter().filter(|r| r.summary.regret.iter().zip(&r.summary.bound_general).all(|(a, b)| a <= b)).count();
    let worst = s
        .doslb
        .iter()
        .map(|r| r.summary.regret.iter().zip(&r.summary.bound_general).map(|(a, b)| a / b).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    outcome(ok >= 29, format!("regret below the general bound at every t on {ok}/30 seeds (max ratio {worst:.3})"))
}

fn criterion_4(s: &Shared) -> Outcome {
    let d = s.setup.instance.d;
    let (mut empty, mut loose, mut rounds) = (0, 0, 0);
    for r in &s.doslb {
        for rec in &r.records {
            rounds += 1;
            empty += usize::from(rec.associated_bis_count == 0);
            loose += usize::from(rec.tight_rows < d);
        }
    }
    outcome(empty == 0 && loose == 0, format!("{rounds} rounds: {empty} without an associated set, {loose} with fewer than d tight rows"))
}

fn criterion_5(s: &Shared) -> Outcome {
    let xi = s.setup.xi().unwrap();
    let t = s.setup.horizon;
    let bound = metrics::bound_bis_count(t as f64, s.setup.instance.d, s.setup.lambda, xi).unwrap();
    let worst = s.doslb.iter().map(|r| RunSummary::last(&r.summary.nonopt_bis_count)).fold(0.0, f64::max);
    let n = s.doslb.len() as f64;
    let at = |k: usize| s.doslb.iter().map(|r| r.summary.nonopt_bis_count[k - 1]).sum::<f64>() / n;
    let (early, late) = (at(1000), at(t));
    let sublinear = late / t as f64 <= 0.1 * early / 1000.0;
    outcome(
        worst <= bound && sublinear,
        format!(
            "max count {worst} <= bound {bound:.0}: {}; mean count {early:.1} at t=1000, {late:.1} at t={t}; rate {:.4} vs 0.1 x {:.4}: {}",
            worst <= bound,
            late / t as f64,
            early / 1000.0,
            if sublinear { "sublinear" } else { "not sublinear" }
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = instance::running_example();
    let report = gaps::xi(&p).unwrap();
    let rec = |b: &[usize]| report.record(&Bis::one_based(b)).unwrap().classification.clone();
    let (delta, spread, _) = gaps::efficiency_parts(&p, &Bis::one_based(&[2, 4])).unwrap();
    let gamma = gaps::feasibility_separation(&p, &Bis::one_based(&[2, 3]), 3).unwrap().unwrap_or(f64::NAN);
    let checks = [
        ("6 sets", report.records.len() == 6),
        ("{1,4} inconsistent", !rec(&[1, 4]).consistent),
        ("{3,4} optimal", rec(&[3, 4]).optimal && report.records.iter().filter(|r| r.classification.optimal).count() == 1),
        ("x*", (report.x_star[0] - 2.9).abs() <= 1e-9 && (report.x_star[1] - 1.1).abs() <= 1e-9),
        ("delta{2,4}", (delta - 0.18).abs() <= 1e-9),
        ("gamma({2,3};4)", (gamma - 0.45).abs() <= 1e-9),
        ("spread", (spread - 3.2).abs() <= 1e-6),
        ("Xi > 0", report.xi > 0.0),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(failed.is_empty(), format!("Xi = {:.6} at {}; failed pins: {failed:?}", report.xi, report.xi_bis))
}

fn criterion_7(s: &Shared) -> Outcome {
    let xi = s.setup.xi().unwrap();
    let (nonopt, bad) = small_noise_implies_optimal(&s.doslb, xi);
    outcome(bad == 0, format!("{nonopt} non-optimally associated rounds, {bad} with rho < Xi = {xi:.6}"))
}

fn criterion_8(s: &Shared) -> Outcome {
    let xi = s.setup.xi().unwrap();
    let t = s.setup.horizon as f64;
    let (d, lambda, eps) = (s.setup.instance.d, s.setup.lambda, s.setup.eps);
    let relaxed_bound = metrics::bound_polytope(t, d, lambda, xi, eps).unwrap();
    let count_bound = metrics::bound_eps_violations(t, d, lambda, eps).unwrap();
    let relaxed = s.doslb.iter().map(|r| RunSummary::last(&r.summary.relaxed_regret)).fold(0.0, f64::max);
    let count = s.doslb.iter().map(|r| RunSummary::last(&r.summary.eps_violation_count)).fold(0.0, f64::max);
    outcome(
        relaxed <= relaxed_bound && count <= count_bound,
        format!("max relaxed regret {relaxed:.1} <= {relaxed_bound:.0}; max eps-violation count {count} <= {count_bound:.0}"),
    )
}

fn criterion_9(s: &Shared) -> (Outcome, Vec<(RunSetup, Vec<Run>)>) {
    let lts = run_all(&s.setup, &[PolicyKind::SafeLts], &seeds(30)).unwrap();
    let mut unsafe_rounds = 0;
    for r in &lts {
        unsafe_rounds += r.records.iter().filter(|rec| rec.covered && rec.max_violation() > 1e-8).count();
    }
    let mut both = s.doslb.clone();
    both.extend(lts.iter().cloned());
    let d_eff = mean_final(&both, PolicyKind::Doslb, |x| &x.efficacy_regret);
    let l_eff = mean_final(&both, PolicyKind::SafeLts, |x| &x.efficacy_regret);

    let mut hard_cfg = example_config(10_000, 30);
    hard_cfg.alpha_overrides = BTreeMap::from([("4".to_string(), 0.1)]);
    let hard_setup = RunSetup::from_config(&hard_cfg).unwrap();
    let hard = run_all(&hard_setup, &[PolicyKind::Doslb, PolicyKind::SafeLts], &hard_cfg.seeds).unwrap();
    let hd = mean_final(&hard, PolicyKind::Doslb, |x| &x.efficacy_regret);
    let hl = mean_final(&hard, PolicyKind::SafeLts, |x| &x.efficacy_regret);
    let pass = unsafe_rounds == 0 && d_eff < l_eff && hl >= 10.0 * hd;
    let o = outcome(
        pass,
        format!(
            "covered unsafe Safe-LTS rounds {unsafe_rounds}; efficacy regret doslb {d_eff:.1} < safelts {l_eff:.1}; hard case safelts {hl:.1} >= 10 x doslb {hd:.1}"
        ),
    );
    (o, vec![(s.setup.clone(), lts), (hard_setup, hard)])
}

fn criterion_10() -> (Outcome, Vec<(RunSetup, Vec<Run>)>) {
    let mut gaps_ok = true;
    let mut worst_xi = f64::INFINITY;
    for eps in [0.02, 0.05, 0.1] {
        for sign in ["+", "-"] {
            let src = format!("lower-bound:1:{eps}:{sign}");
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = run_cli(["doslb", "gaps", src.as_str()], &mut out, &mut err);
            let text = String::from_utf8(out).unwrap();
            gaps_ok &= code == 0 && text.contains("Xi >= 1/8: yes");
            worst_xi = worst_xi.min(gaps::xi(&instance::lower_bound_instance(1, eps, &[if sign == "+" { 1.0 } else { -1.0 }]).unwrap()).unwrap().xi);
        }
    }

    // slack 1/sqrt(T) per horizon, sign drawn per seed, unit Gaussian noise
    let horizons = [1000usize, 4000, 16000];
    let n_seeds = 24u64;
    let mut sign_rng = RngState::with_stream(99, 7);
    let signs: Vec<&str> = (0..n_seeds).map(|_| if sign_rng.uniform() < 0.5 { "+" } else { "-" }).collect();
    let mut means = Vec::new();
    let mut all = Vec::new();
    for &t in &horizons {
        let eps = 1.0 / (t as f64).sqrt();
        let mut total = 0.0;
        for (k, sign) in signs.iter().enumerate() {
            let cfg = ExperimentConfig {
                instance: format!("lower-bound:1:{eps}:{sign}"),
                horizon: t,
                seeds: vec![k as u64 + 1],
                noise: NoiseModel::gaussian(1.0),
                ..ExperimentConfig::default()
            };
            let setup = RunSetup::from_config(&cfg).unwrap();
            let runs = run_all(&setup, &[PolicyKind::Doslb], &cfg.seeds).unwrap();
            total += RunSummary::last(&runs[0].summary.regret);
            all.push((setup, runs));
        }
        means.push(total / n_seeds as f64);
    }
    // least-squares fits of R = c sqrt(T) and of log R = a + b log T
    let c = horizons.iter().zip(&means).map(|(t, r)| r * (*t as f64).sqrt()).sum::<f64>() / horizons.iter().map(|t| *t as f64).sum::<f64>();
    let xs: Vec<f64> = horizons.iter().map(|t| (*t as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let pass = gaps_ok && c > 0.0 && slope >= 0.5;
    let o = outcome(
        pass,
        format!(
            "Xi >= 1/8 on all 6 instances: {gaps_ok} (min {worst_xi:.4}); mean regret {:?} at T = {horizons:?}; c = {c:.4}, log-log slope {slope:.3} (need >= 0.5)",
            means.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>()
        ),
    );
    (o, all)
}

fn criterion_11(groups: &[(&RunSetup, &[Run])]) -> Outcome {
    let mut worst = (0.0f64, 0);
    let mut n = 0;
    for (setup, runs) in groups {
        let radius = instance::validate(&setup.instance).unwrap().domain_radius;
        let w = potential_ratio(runs, setup, radius);
        if w.0 > worst.0 {
            worst = w;
        }
        n += runs.len();
    }
    outcome(
        worst.0 <= 1.0,
        format!(
            "{n} trajectories, largest potential / bound = {:.4} at t = {}; against twice the bound {:.4}",
            worst.0,
            worst.1,
            worst.0 / 2.0
        ),
    )
}

fn nesting_holds(setup: &RunSetup, seed: u64) -> bool {
    let p = &setup.instance;
    let mut rng = RngState::with_stream(seed, 11);
    let mut g = GramState::new(p.d, setup.lambda, p.num_known(), p.num_unknown()).unwrap();
    for _ in 0..25 {
        let x = Vector::from([4.0 * rng.uniform(), 2.0 * rng.uniform()]);
        let f = doslb::environment::step(p, &x, &setup.noise, &mut rng).unwrap();
        g.update(&x, &f).unwrap();
    }
    let region = |geometry| estimation::region(&g, Target::Unknown(0), geometry, &setup.radius).unwrap();
    let (e, l1, linf) = (region(RegionGeometry::Ellipsoid), region(RegionGeometry::BoxL1), region(RegionGeometry::BoxLinf));
    (0..1000).all(|_| {
        let u = rng.normal_vector(p.d);
        let (lo, hi) = (e.support_min(&u).unwrap(), e.support_max(&u).unwrap());
        [&l1, &linf].iter().all(|b| b.support_min(&u).unwrap() <= lo + 1e-9 && hi <= b.support_max(&u).unwrap() + 1e-9)
    })
}

fn criterion_12(s: &Shared) -> (Outcome, (RunSetup, Vec<Run>)) {
    let mut cfg = example_config(10_000, 30);
    cfg.geometry = GeometrySetting::Linf;
    let setup = RunSetup::from_config(&cfg).unwrap();
    let linf = run_all(&setup, &[PolicyKind::Doslb], &cfg.seeds).unwrap();
    let xi = setup.xi().unwrap();
    let (n1, bad1) = small_noise_implies_optimal(&s.doslb, xi);
    let (n2, bad2) = small_noise_implies_optimal(&linf, xi);
    let nested = (1..=5).all(|k| nesting_holds(&s.setup, k));
    // the box error scale is the ellipsoid one times sqrt(d)
    let g = GramState::new(2, s.setup.lambda, 3, 1).unwrap();
    let x = Vector::from([1.0, 0.5]);
    let inflated = estimation::rho(&g, &x, &s.setup.radius, RegionGeometry::BoxLinf).unwrap()
        / estimation::rho(&g, &x, &s.setup.radius, RegionGeometry::Ellipsoid).unwrap();
    let done = linf.len() == 30 && linf.iter().all(|r| r.records.len() == 10_000);
    let pass = done && nested && bad1 == 0 && bad2 == 0 && (inflated - 2f64.sqrt()).abs() < 1e-12;
    let o = outcome(
        pass,
        format!(
            "L1 and Linf runs complete: {done}; nesting on 10^3 directions: {nested}; rho inflation {inflated:.6}; rho < Xi rounds L1 {bad1}/{n1}, Linf {bad2}/{n2}; regret L1 {:.1}, Linf {:.1}",
            mean_final(&s.doslb, PolicyKind::Doslb, |x| &x.regret),
            mean_final(&linf, PolicyKind::Doslb, |x| &x.regret)
        ),
    );
    (o, (setup, linf))
}

fn report(lines: &mut Vec<(usize, Outcome)>, k: usize, o: Outcome, start: Instant) {
    println!("criterion {k:>2}: {} ({:.1} s) {}", if o.pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64(), o.detail);
    lines.push((k, o));
}

fn main() {
    let mut lines = Vec::new();
    let t0 = Instant::now();
    report(&mut lines, 1, criterion_1(), t0);
    report(&mut lines, 2, criterion_2(), t0);

    let cfg = example_config(10_000, 30);
    let setup = RunSetup::from_config(&cfg).unwrap();
    let doslb = run_all(&setup, &[PolicyKind::Doslb], &cfg.seeds).unwrap();
    let shared = Shared { setup, doslb };

    report(&mut lines, 3, criterion_3(&shared), t0);
    report(&mut lines, 4, criterion_4(&shared), t0);
    report(&mut lines, 5, criterion_5(&shared), t0);
    report(&mut lines, 6, criterion_6(), t0);
    report(&mut lines, 7, criterion_7(&shared), t0);
    report(&mut lines, 8, criterion_8(&shared), t0);
    let (o9, extra9) = criterion_9(&shared);
    report(&mut lines, 9, o9, t0);
    let (o10, extra10) = criterion_10();
    report(&mut lines, 10, o10, t0);
    let (o12, extra12) = criterion_12(&shared);

    let mut groups: Vec<(&RunSetup, &[Run])> = vec![(&shared.setup, &shared.doslb), (&extra12.0, &extra12.1)];
    groups.extend(extra9.iter().map(|(s, r)| (s, r.as_slice())));
    groups.extend(extra10.iter().map(|(s, r)| (s, r.as_slice())));
    report(&mut lines, 11, criterion_11(&groups), t0);
    report(&mut lines, 12, o12, t0);

    let failed: Vec<usize> = lines.iter().filter(|(_, o)| !o.pass).map(|(k, _)| *k).collect();
    println!("{} of {} criteria passed", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
