//! A constrained multi-armed bandit seen as a linear bandit on the simplex:
//! arm gaps, the LP optimum, and sampling arms from a mixed action.

use doslb::environment::{self, RngState};
use doslb::gaps;
use doslb::instance;

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let mu = [0.5, 3f64.sqrt() / 4.0, 0.75];
    let p = instance::simplex_mab_instance(&mu, &[0.0, 0.0, 1.0], 0.5)?;
    let arms = gaps::arm_gaps(&p).ok_or("no safety constraint")?;
    println!("best safe arm {} with gaps {:?}, feasibility gaps {:?}", arms.optimal_arm + 1, arms.efficiency, arms.feasibility);

    // Mixing in the unsafe arm can beat every safe arm.
    let (x, value) = p.optimum()?;
    println!("LP optimum {x:?} with value {value:.4}");

    let mut rng = RngState::with_stream(3, 0);
    let mut counts = [0usize; 3];
    for _ in 0..10_000 {
        counts[environment::sample_arm(&x, &mut rng)?] += 1;
    }
    println!("arm draws from the optimum: {counts:?}");
    Ok(arms.optimal_arm)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
