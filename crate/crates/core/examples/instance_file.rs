//! Describe a custom instance in TOML, check its assumptions, and use it
//! from an experiment configuration.

use doslb::gaps;
use doslb::harness::{simulate, ExperimentConfig, RunSetup};
use doslb::instance::{self, ProblemInstance};
use doslb::metrics::RunSummary;
use doslb::policy::PolicyKind;

const SQUARE: &str = r#"
label = "unit square with a hidden cut"
d = 2
theta_star = [0.6, 0.8]

[[constraints]]
vector = [1.0, 0.0]
level = 0.9
visibility = "known"

[[constraints]]
vector = [0.0, 1.0]
level = 0.9
visibility = "known"

[[constraints]]
vector = [-1.0, 0.0]
level = 0.0
visibility = "known"

[[constraints]]
vector = [0.0, -1.0]
level = 0.0
visibility = "known"

[[constraints]]
vector = [0.6, 0.6]
level = 0.75
visibility = "unknown"
"#;

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    let p = ProblemInstance::from_toml(SQUARE)?;
    let report = instance::validate(&p)?;
    println!("radius {:.4}, parameter bound {:.4}, suggested lambda {}", report.domain_radius, report.parameter_bound, report.suggested_lambda);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("Xi = {:.6}", gaps::xi(&p)?.xi);

    let path = std::env::temp_dir().join("doslb-example-square.toml");
    p.save(&path)?;
    let cfg = ExperimentConfig { instance: path.display().to_string(), horizon: 500, ..ExperimentConfig::default() };
    let setup = RunSetup::from_config(&cfg)?;
    let run = simulate(&setup, PolicyKind::Doslb, 1)?;
    let regret = RunSummary::last(&run.summary.regret);
    println!("regret after {} rounds: {regret:.3}", cfg.horizon);
    Ok(regret)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
