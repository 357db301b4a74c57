//! Run the doubly-optimistic policy on the running example and write the
//! round table, summaries and figures.

use doslb::harness::{output, run_all, ExperimentConfig, RunSetup};
use doslb::metrics::RunSummary;
use doslb::policy::PolicyKind;

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        horizon: 2000,
        seeds: vec![1, 2, 3],
        out: std::env::temp_dir().join("doslb-example-run"),
        ..ExperimentConfig::default()
    };
    let setup = RunSetup::from_config(&cfg)?;
    println!("lambda {}, S {:.4}, Xi {:?}", setup.lambda, setup.radius.s, setup.xi());

    let runs = run_all(&setup, &[PolicyKind::Doslb], &cfg.seeds)?;
    for run in &runs {
        let s = &run.summary;
        println!(
            "{}: regret {:.2}, relaxed {:.2}, general bound {:.1}, rounds off the optimal BIS {}",
            run.id(),
            RunSummary::last(&s.regret),
            RunSummary::last(&s.relaxed_regret),
            RunSummary::last(&s.bound_general),
            RunSummary::last(&s.nonopt_bis_count)
        );
    }
    let written = output::write_artifacts(&cfg.out, &cfg, &setup, &runs, false)?;
    println!("wrote {} files under {}", written.len(), cfg.out.display());
    Ok(runs.iter().map(|r| RunSummary::last(&r.summary.regret)).sum::<f64>() / runs.len() as f64)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
