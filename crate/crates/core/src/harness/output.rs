//! CSV tables and figures for finished runs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::plot::{Figure, Series, Style};
use super::sim::{Run, RunSetup};
use super::Result;
use crate::metrics::RunSummary;
use crate::policy::PolicyKind;

/// Decimal rendering with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    let prec = (11 - mag).clamp(0, 40) as usize;
    format!("{v:.prec$}")
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

/// Rounds at which curves are plotted: every round for short runs, about 400 otherwise.
pub fn plot_grid(horizon: usize) -> Vec<usize> {
    const POINTS: usize = 400;
    if horizon <= POINTS {
        return (1..=horizon).collect();
    }
    let mut ts: Vec<usize> = (1..=POINTS).map(|k| (k * horizon).div_ceil(POINTS)).collect();
    ts.insert(0, 1);
    ts.dedup();
    ts
}

/// Mean and sample standard deviation across curves, round by round.
pub fn mean_std(curves: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    let n = curves.len() as f64;
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    for t in 0..len {
        let m = curves.iter().map(|c| c[t]).sum::<f64>() / n;
        let var = if curves.len() > 1 { curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        mean.push(m);
        std.push(var.sqrt());
    }
    (mean, std)
}

pub fn write_rounds_csv(path: &Path, runs: &[Run]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let d = runs.first().and_then(|r| r.records.first()).map_or(0, |r| r.x.dim());
    let mut header: Vec<String> = vec!["run_id".into(), "seed".into(), "t".into()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(
        [
            "reward",
            "instantaneous_regret",
            "relaxed_regret_increment",
            "efficacy_gap",
            "max_violation",
            "rho_t",
            "optimally_associated",
            "permissible_empty_flag",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for run in runs {
        let id = run.id();
        for r in &run.records {
            let mut row = vec![id.clone(), run.seed.to_string(), r.t.to_string()];
            row.extend(r.x.iter().map(|v| sig12(*v)));
            row.extend([
                sig12(r.reward),
                sig12(r.instantaneous_regret()),
                sig12(r.relaxed_increment(run.summary.eps)),
                sig12(r.efficacy_gap),
                sig12(r.max_violation()),
                sig12(r.rho),
                flag(r.optimally_associated),
                flag(r.permissible_empty),
            ]);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub run_id: String,
    pub policy: String,
    pub seed: u64,
    pub horizon: usize,
    pub regret: String,
    pub relaxed_regret: String,
    pub efficacy_regret: String,
    pub safety_regret: String,
    pub nonopt_bis_count: String,
    pub eps_violation_count: String,
    pub potential: String,
    pub permissible_empty_rounds: usize,
    pub uncovered_rounds: usize,
    pub bound_general: String,
    pub bound_polytope: String,
    pub bound_bis_count: String,
}

fn last_or_blank(curve: &[f64]) -> String {
    curve.last().map(|v| sig12(*v)).unwrap_or_default()
}

pub fn summary_row(run: &Run) -> SummaryRow {
    let s = &run.summary;
    SummaryRow {
        run_id: run.id(),
        policy: run.policy.name().into(),
        seed: run.seed,
        horizon: s.horizon(),
        regret: last_or_blank(&s.regret),
        relaxed_regret: last_or_blank(&s.relaxed_regret),
        efficacy_regret: last_or_blank(&s.efficacy_regret),
        safety_regret: last_or_blank(&s.safety_regret),
        nonopt_bis_count: last_or_blank(&s.nonopt_bis_count),
        eps_violation_count: last_or_blank(&s.eps_violation_count),
        potential: last_or_blank(&s.potential),
        permissible_empty_rounds: run.records.iter().filter(|r| r.permissible_empty).count(),
        uncovered_rounds: run.records.iter().filter(|r| !r.covered).count(),
        bound_general: last_or_blank(&s.bound_general),
        bound_polytope: last_or_blank(&s.bound_polytope),
        bound_bis_count: last_or_blank(&s.bound_bis_count),
    }
}

pub fn write_summary_csv(path: &Path, runs: &[Run]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for run in runs {
        w.serialize(summary_row(run))?;
    }
    w.flush()?;
    Ok(())
}

type Curve = fn(&RunSummary) -> &[f64];

const METRICS: [(&str, Curve); 7] = [
    ("regret", |s| &s.regret),
    ("relaxed_regret", |s| &s.relaxed_regret),
    ("efficacy_regret", |s| &s.efficacy_regret),
    ("safety_regret", |s| &s.safety_regret),
    ("nonopt_bis_count", |s| &s.nonopt_bis_count),
    ("eps_violation_count", |s| &s.eps_violation_count),
    ("potential", |s| &s.potential),
];

fn policies_of(runs: &[Run]) -> Vec<PolicyKind> {
    let mut out: Vec<PolicyKind> = Vec::new();
    for r in runs {
        if !out.contains(&r.policy) {
            out.push(r.policy);
        }
    }
    out
}

fn runs_of(runs: &[Run], kind: PolicyKind) -> Vec<&Run> {
    runs.iter().filter(|r| r.policy == kind).collect()
}

/// Final-round mean, standard deviation, minimum and maximum of each metric per policy.
pub fn write_aggregate_csv(path: &Path, runs: &[Run]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["policy", "metric", "seeds", "horizon", "mean", "std", "min", "max"])?;
    for kind in policies_of(runs) {
        let rs = runs_of(runs, kind);
        for (name, curve) in METRICS {
            let finals: Vec<f64> = rs.iter().map(|r| RunSummary::last(curve(&r.summary))).collect();
            let slices: Vec<&[f64]> = finals.iter().map(std::slice::from_ref).collect();
            let (m, s) = mean_std(&slices);
            let min = finals.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            w.write_record([
                kind.name().to_string(),
                name.to_string(),
                rs.len().to_string(),
                rs.first().map_or(0, |r| r.summary.horizon()).to_string(),
                sig12(m[0]),
                sig12(s[0]),
                sig12(min),
                sig12(max),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn sample(curve: &[f64], grid: &[usize]) -> Vec<f64> {
    grid.iter().map(|&t| curve[t - 1]).collect()
}

/// Mean band plus one faint line per seed for one metric of one policy.
fn policy_series(runs: &[&Run], curve: Curve, label: &str, grid: &[usize], color: usize, style: Style, seeds: bool) -> Vec<Series> {
    let ts: Vec<f64> = grid.iter().map(|&t| t as f64).collect();
    let curves: Vec<&[f64]> = runs.iter().map(|r| curve(&r.summary)).collect();
    let (mean, std) = mean_std(&curves);
    let lower: Vec<f64> = mean.iter().zip(&std).map(|(m, s)| m - s).collect();
    let upper: Vec<f64> = mean.iter().zip(&std).map(|(m, s)| m + s).collect();
    let mut out = Vec::new();
    if seeds {
        for r in runs {
            out.push(
                Series::line(format!("{label} seed {}", r.seed), ts.clone(), sample(curve(&r.summary), grid), color)
                    .styled(Style::Faint),
            );
        }
    }
    out.push(
        Series::line(format!("{label} mean"), ts, sample(&mean, grid), color)
            .with_band(sample(&lower, grid), sample(&upper, grid))
            .styled(style),
    );
    out
}

fn bound_series(name: &str, curve: &[f64], grid: &[usize], color: usize) -> Option<Series> {
    if curve.is_empty() {
        return None;
    }
    let ts = grid.iter().map(|&t| t as f64).collect();
    Some(Series::line(name, ts, sample(curve, grid), color).styled(Style::Dashed))
}

const BOUND_COLORS: [usize; 3] = [7, 6, 5];

pub fn regret_figure(runs: &[Run]) -> Figure {
    let mut fig = Figure::new("Cumulative regret and upper bounds", "round t", "regret");
    let Some(first) = runs.first() else { return fig };
    let grid = plot_grid(first.summary.horizon());
    for (i, kind) in policies_of(runs).into_iter().enumerate() {
        let rs = runs_of(runs, kind);
        for s in policy_series(&rs, |s| &s.regret, &format!("{} regret", kind.name()), &grid, 2 * i, Style::Solid, true) {
            fig.push(s);
        }
        for s in policy_series(&rs, |s| &s.relaxed_regret, &format!("{} relaxed regret", kind.name()), &grid, 2 * i + 1, Style::Solid, false) {
            fig.push(s);
        }
    }
    let s = &first.summary;
    fig.series.extend(bound_series("general bound", &s.bound_general, &grid, BOUND_COLORS[0]));
    fig.series.extend(bound_series("polytope relaxed bound", &s.bound_polytope, &grid, BOUND_COLORS[1]));
    fig
}

pub fn bis_count_figure(runs: &[Run]) -> Figure {
    let mut fig = Figure::new("Rounds not optimally associated", "round t", "count (log scale)").log_y();
    let Some(first) = runs.first() else { return fig };
    let grid = plot_grid(first.summary.horizon());
    for (i, kind) in policies_of(runs).into_iter().enumerate() {
        let rs = runs_of(runs, kind);
        fig.series.extend(policy_series(&rs, |s| &s.nonopt_bis_count, kind.name(), &grid, 2 * i, Style::Solid, true));
    }
    fig.series.extend(bound_series("count bound", &first.summary.bound_bis_count, &grid, BOUND_COLORS[0]));
    fig
}

fn compare_figure(runs: &[Run], title: &str, y: &str, curve: Curve) -> Figure {
    let mut fig = Figure::new(title, "round t", y);
    let Some(first) = runs.first() else { return fig };
    let grid = plot_grid(first.summary.horizon());
    for (i, kind) in policies_of(runs).into_iter().enumerate() {
        let rs = runs_of(runs, kind);
        fig.series.extend(policy_series(&rs, curve, kind.name(), &grid, 2 * i, Style::Solid, true));
    }
    fig
}

pub fn compare_efficacy_figure(runs: &[Run]) -> Figure {
    compare_figure(runs, "Efficacy regret", "sum of <theta*, x* - x_t>", |s| &s.efficacy_regret)
}

pub fn compare_safety_figure(runs: &[Run]) -> Figure {
    compare_figure(runs, "Safety regret", "sum of max_i violation+", |s| &s.safety_regret)
}

/// Configuration as run, with `auto` entries replaced by the values used.
pub fn resolved_config(cfg: &ExperimentConfig, setup: &RunSetup) -> ExperimentConfig {
    use super::config::AutoOr;
    ExperimentConfig {
        lambda: AutoOr::Value(setup.lambda),
        s_bound: AutoOr::Value(setup.radius.s),
        ..cfg.clone()
    }
}

/// Writes all artifacts of a run; `compare` adds the two comparison figures.
pub fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, setup: &RunSetup, runs: &[Run], compare: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let config_path = dir.join("config_used.toml");
    std::fs::write(&config_path, resolved_config(cfg, setup).to_toml())?;
    written.push(config_path);
    if let Some(report) = &setup.gaps {
        let path = dir.join("gaps.toml");
        std::fs::write(&path, report.to_toml().map_err(super::HarnessError::Config)?)?;
        written.push(path);
    }
    if cfg.write_rounds {
        let path = dir.join("rounds.csv");
        write_rounds_csv(&path, runs)?;
        written.push(path);
    }
    let path = dir.join("summary.csv");
    write_summary_csv(&path, runs)?;
    written.push(path);
    let path = dir.join("aggregate.csv");
    write_aggregate_csv(&path, runs)?;
    written.push(path);

    let mut figures = vec![("fig_regret", regret_figure(runs)), ("fig_bis_count", bis_count_figure(runs))];
    if compare {
        figures.push(("fig_compare_efficacy", compare_efficacy_figure(runs)));
        figures.push(("fig_compare_safety", compare_safety_figure(runs)));
    }
    for (stem, fig) in figures {
        fig.write(dir, stem)?;
        written.push(dir.join(format!("{stem}.svg")));
        written.push(dir.join(format!("{stem}.csv")));
    }
    Ok(written)
}
