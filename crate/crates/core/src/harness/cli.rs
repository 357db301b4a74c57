//! Command-line front end: `run`, `compare`, `gaps` and `validate`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{load_instance_source, ExperimentConfig, GeometrySetting};
use super::sim::{run_all, Run, RunSetup};
use super::{output, HarnessError, Result};
use crate::gaps;
use crate::instance;
use crate::metrics::RunSummary;
use crate::policy::PolicyKind;

#[derive(Debug, Parser)]
#[command(name = "doslb", version, about = "Safe linear bandit simulator and gap analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the configured policies and write CSV tables and figures.
    Run(RunArgs),
    /// Like `run`, with paired seeds and efficacy/safety comparison figures.
    Compare(RunArgs),
    /// Print the per-BIS gap table of an instance.
    Gaps(InstanceArgs),
    /// Check the boundedness assumptions of an instance.
    Validate(InstanceArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds; `a-b` denotes an inclusive range.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, value_parser = ["l1", "linf", "ellipsoid-reference"])]
    geometry: Option<String>,
    #[arg(long, value_delimiter = ',', value_parser = ["doslb", "safelts", "oracle"])]
    policy: Vec<String>,
    /// Built-in instance name or instance file; overrides the config.
    #[arg(long)]
    instance: Option<String>,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Built-in instance name or instance file.
    instance: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the serialized report.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || HarnessError::Config(format!("cannot parse seed list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_policy(s: &str) -> PolicyKind {
    match s {
        "doslb" => PolicyKind::Doslb,
        "safelts" => PolicyKind::SafeLts,
        _ => PolicyKind::Oracle,
    }
}

fn build_config(a: &RunArgs, compare: bool) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    if let Some(s) = &a.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(g) = &a.geometry {
        cfg.geometry = GeometrySetting::parse(g).expect("restricted by clap");
    }
    if !a.policy.is_empty() {
        cfg.policies = a.policy.iter().map(|p| parse_policy(p)).collect();
    }
    if let Some(i) = &a.instance {
        cfg.instance = i.clone();
    }
    if compare && cfg.policies.len() < 2 {
        cfg.policies = vec![PolicyKind::Doslb, PolicyKind::SafeLts];
    }
    cfg.check()?;
    Ok(cfg)
}

fn print_final(out: &mut dyn Write, runs: &[Run]) -> Result<()> {
    let mut kinds: Vec<PolicyKind> = Vec::new();
    for r in runs {
        if !kinds.contains(&r.policy) {
            kinds.push(r.policy);
        }
    }
    writeln!(out, "{:<8} {:>6} {:>14} {:>14} {:>14} {:>14} {:>12}", "policy", "seeds", "regret", "relaxed", "efficacy", "safety", "non-opt BIS")?;
    for k in kinds {
        let rs: Vec<&Run> = runs.iter().filter(|r| r.policy == k).collect();
        let n = rs.len() as f64;
        let mean = |f: fn(&RunSummary) -> &[f64]| rs.iter().map(|r| RunSummary::last(f(&r.summary))).sum::<f64>() / n;
        writeln!(
            out,
            "{:<8} {:>6} {:>14.4} {:>14.4} {:>14.4} {:>14.4} {:>12.1}",
            k.name(),
            rs.len(),
            mean(|s| &s.regret),
            mean(|s| &s.relaxed_regret),
            mean(|s| &s.efficacy_regret),
            mean(|s| &s.safety_regret),
            mean(|s| &s.nonopt_bis_count),
        )?;
    }
    Ok(())
}

fn cmd_run(a: &RunArgs, compare: bool, out: &mut dyn Write) -> Result<()> {
    let cfg = build_config(a, compare)?;
    let setup = RunSetup::from_config(&cfg)?;
    writeln!(
        out,
        "instance {}, T = {}, {} seed(s), lambda = {}, S = {:.6}, geometry {:?}",
        cfg.instance,
        cfg.horizon,
        cfg.seeds.len(),
        setup.lambda,
        setup.radius.s,
        cfg.geometry
    )?;
    if let Some(xi) = setup.xi() {
        writeln!(out, "Xi = {xi:.6}")?;
    }
    let runs = run_all(&setup, &cfg.policies, &cfg.seeds)?;
    let written = output::write_artifacts(&cfg.out, &cfg, &setup, &runs, compare)?;
    print_final(out, &runs)?;
    writeln!(out, "wrote {} files to {}", written.len(), cfg.out.display())?;
    Ok(())
}

fn instance_source(a: &InstanceArgs) -> Result<String> {
    match (&a.instance, &a.config) {
        (Some(i), _) => Ok(i.clone()),
        (None, Some(c)) => Ok(ExperimentConfig::load(c)?.instance),
        (None, None) => Err(HarnessError::Config("an instance name, file, or --config is required".into())),
    }
}

fn load(a: &InstanceArgs) -> Result<(String, instance::ProblemInstance)> {
    if let (None, Some(c)) = (&a.instance, &a.config) {
        let cfg = ExperimentConfig::load(c)?;
        let p = cfg.load_instance()?;
        return Ok((cfg.instance, p));
    }
    let src = instance_source(a)?;
    let p = load_instance_source(&src)?;
    Ok((src, p))
}

fn cmd_gaps(a: &InstanceArgs, out: &mut dyn Write) -> Result<()> {
    let (src, p) = load(a)?;
    let report = gaps::xi(&p)?;
    write!(out, "{}", gaps::render_table(&report))?;
    if src.starts_with("lower-bound:") {
        let ok = report.xi >= 0.125 - 1e-9;
        writeln!(out, "Xi >= 1/8: {}", if ok { "yes" } else { "NO" })?;
        if !ok {
            return Err(HarnessError::Config(format!("lower-bound instance has Xi = {} < 1/8", report.xi)));
        }
    }
    if src == "simplex-mab" {
        if let Some(arms) = gaps::arm_gaps(&p) {
            writeln!(
                out,
                "arm gaps: best safe arm {}, efficiency {:?}, feasibility {:?}, min efficiency {:.6}, min feasibility {:.6}",
                arms.optimal_arm + 1,
                arms.efficiency,
                arms.feasibility,
                arms.min_efficiency,
                arms.min_feasibility
            )?;
        }
    }
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("gaps.toml"), report.to_toml().map_err(HarnessError::Config)?)?;
    }
    Ok(())
}

fn cmd_validate(a: &InstanceArgs, out: &mut dyn Write) -> Result<()> {
    let (src, p) = load(a)?;
    let r = instance::validate(&p)?;
    writeln!(out, "instance {src}: d = {}, {} known, {} unknown constraints", p.d, p.num_known(), p.num_unknown())?;
    writeln!(out, "domain radius      {:.6}", r.domain_radius)?;
    writeln!(out, "parameter bound    {:.6}", r.parameter_bound)?;
    writeln!(out, "domain within unit ball      {}", r.satisfies_a1)?;
    writeln!(out, "parameters within unit ball  {}", r.satisfies_a2)?;
    writeln!(out, "unique optimum     {}", r.optimum_unique)?;
    writeln!(out, "suggested lambda   {}", r.suggested_lambda)?;
    for w in &r.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, false, out),
        Command::Compare(a) => cmd_run(a, true, out),
        Command::Gaps(a) => cmd_gaps(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
