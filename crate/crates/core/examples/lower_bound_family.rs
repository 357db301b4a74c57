//! The hard instance family: effective gaps for several slacks and a short
//! regret run on randomly signed one-dimensional members.

use doslb::environment::RngState;
use doslb::gaps;
use doslb::harness::{simulate, ExperimentConfig, RunSetup};
use doslb::instance;
use doslb::metrics::RunSummary;
use doslb::policy::PolicyKind;

pub fn run_example() -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let mut xis = Vec::new();
    for eps in [0.02, 0.05, 0.1] {
        for sign in [1.0, -1.0] {
            let p = instance::lower_bound_instance(1, eps, &[sign])?;
            let xi = gaps::xi(&p)?.xi;
            println!("eps {eps}, sign {sign:+}: Xi = {xi:.6}");
            xis.push(xi);
        }
    }
    let two = instance::lower_bound_instance(2, 0.05, &[1.0, -1.0])?;
    println!("d = 2: {} constraints, optimum {:?}", two.num_constraints(), two.optimum()?.0);

    let mut coin = RngState::with_stream(11, 9);
    for seed in 1..=3u64 {
        let sign = if coin.uniform() < 0.5 { "+" } else { "-" };
        let cfg = ExperimentConfig { instance: format!("lower-bound:1:0.05:{sign}"), horizon: 1000, ..ExperimentConfig::default() };
        let setup = RunSetup::from_config(&cfg)?;
        let run = simulate(&setup, PolicyKind::Doslb, seed)?;
        println!("seed {seed}, sign {sign}: regret after 1000 rounds {:.3}", RunSummary::last(&run.summary.regret));
    }
    Ok(xis)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
