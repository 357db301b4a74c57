//! Gap analysis of the two-dimensional running example: classify every basic
//! index set and compute the effective gap.

use doslb::gaps::{self, Bis};
use doslb::instance;

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    let p = instance::running_example();
    let report = gaps::xi(&p)?;
    print!("{}", gaps::render_table(&report));

    let inconsistent: Vec<String> =
        report.records.iter().filter(|r| !r.classification.consistent).map(|r| r.bis.to_string()).collect();
    println!("inconsistent: {}", inconsistent.join(" "));
    println!("optimal: {:?}", report.optimal_bises().iter().map(Bis::to_string).collect::<Vec<_>>());

    // The hard variant tightens the unknown constraint.
    let hard = instance::running_example_with_level(0.1);
    let hard_report = gaps::xi(&hard)?;
    println!("unknown level 0.1: x* = {:?}, Xi = {:.6}", hard_report.x_star, hard_report.xi);
    Ok(report.xi)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
