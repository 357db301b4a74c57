//! Solve a small LP and check the optimality certificates from its duals.

use doslb::lp::{self, LpProblem};
use doslb::numeric::Vector;

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3,  x, y >= 0
    let lp = LpProblem::maximize(Vector::from([3.0, 2.0]))
        .with_ineq(&[1.0, 1.0], 4.0)?
        .with_ineq(&[1.0, 3.0], 6.0)?
        .with_ineq(&[1.0, 0.0], 3.0)?
        .with_ineq(&[-1.0, 0.0], 0.0)?
        .with_ineq(&[0.0, -1.0], 0.0)?;
    let sol = lp::solve(&lp)?;
    println!("status {:?}, x = {:?}, value {}", sol.status, sol.x, sol.value);
    println!("inequality duals {:?}", sol.dual_ineq);

    let cert = lp::certificates(&lp, &sol);
    println!(
        "primal infeasibility {:.1e}, dual sign {:.1e}, stationarity {:.1e}, duality gap {:.1e}, slackness {:.1e}",
        cert.primal_infeasibility, cert.dual_sign_violation, cert.stationarity_residual, cert.duality_gap, cert.complementary_slackness
    );
    assert!(cert.holds(sol.value));

    let infeasible = LpProblem::maximize(Vector::from([1.0])).with_ineq(&[1.0], -1.0)?.with_ineq(&[-1.0], -1.0)?;
    println!("x <= -1 and x >= 1: {:?}", lp::solve(&infeasible)?.status);
    Ok(sol.value)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
