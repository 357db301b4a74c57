//! Paired-seed comparison with the pessimistic Thompson-sampling baseline, on
//! the running example and on its hard variant.

use std::collections::BTreeMap;

use doslb::harness::{run_all, ExperimentConfig, Run, RunSetup};
use doslb::metrics::RunSummary;
use doslb::policy::PolicyKind;

fn mean_final(runs: &[Run], kind: PolicyKind, curve: fn(&RunSummary) -> &[f64]) -> f64 {
    let rs: Vec<&Run> = runs.iter().filter(|r| r.policy == kind).collect();
    rs.iter().map(|r| RunSummary::last(curve(&r.summary))).sum::<f64>() / rs.len() as f64
}

pub fn run_example() -> Result<Vec<(f64, f64)>, Box<dyn std::error::Error>> {
    let policies = [PolicyKind::Doslb, PolicyKind::SafeLts];
    let mut out = Vec::new();
    for (label, level) in [("default", None), ("hard", Some(0.1))] {
        let mut cfg = ExperimentConfig { horizon: 1500, seeds: vec![1, 2], policies: policies.to_vec(), ..ExperimentConfig::default() };
        if let Some(l) = level {
            cfg.alpha_overrides = BTreeMap::from([("4".to_string(), l)]);
        }
        let setup = RunSetup::from_config(&cfg)?;
        let runs = run_all(&setup, &policies, &cfg.seeds)?;
        let eff = (mean_final(&runs, PolicyKind::Doslb, |s| &s.efficacy_regret), mean_final(&runs, PolicyKind::SafeLts, |s| &s.efficacy_regret));
        let safety = (mean_final(&runs, PolicyKind::Doslb, |s| &s.safety_regret), mean_final(&runs, PolicyKind::SafeLts, |s| &s.safety_regret));
        println!("{label}: efficacy regret doslb {:.2} vs safelts {:.2}; safety regret doslb {:.2} vs safelts {:.2}", eff.0, eff.1, safety.0, safety.1);
        out.push(eff);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
