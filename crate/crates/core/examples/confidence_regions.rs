//! Fit the regularized least-squares state on a few noisy rounds and compare
//! the ellipsoidal confidence region with its two box relaxations.

use doslb::environment::{self, NoiseModel, RngState};
use doslb::estimation::{self, GramState, RadiusParams, RegionGeometry, Target};
use doslb::instance;
use doslb::numeric::Vector;

pub fn run_example() -> Result<bool, Box<dyn std::error::Error>> {
    let p = instance::running_example();
    let params = RadiusParams::new(0.05, p.num_unknown());
    let mut g = GramState::new(p.d, 16.0, p.num_known(), p.num_unknown())?;
    let mut rng = RngState::with_stream(7, 1);
    let noise = NoiseModel::gaussian(0.1);
    let actions = [[4.0, 0.0], [2.0, 2.0], [1.0, 0.5], [3.0, 1.0]];
    for t in 0..200 {
        let x = Vector::from(actions[t % actions.len()]);
        let fb = environment::step(&p, &x, &noise, &mut rng)?;
        g.update(&x, &fb)?;
    }
    println!("rounds {}, theta_hat {:?}, sqrt(beta) {:.4}", g.rounds(), g.theta_hat(), estimation::sqrt_beta(&g, &params));

    let mut all_cover = true;
    for geometry in [RegionGeometry::Ellipsoid, RegionGeometry::BoxLinf, RegionGeometry::BoxL1] {
        let r = estimation::region(&g, Target::Reward, geometry, &params)?;
        let dir = Vector::from([0.1, 1.0]);
        let covers = r.contains(&p.theta_star)?;
        all_cover &= covers;
        println!(
            "{geometry:?}: support of <theta, (0.1, 1)> in [{:.4}, {:.4}], contains theta* {covers}",
            r.support_min(&dir)?,
            r.support_max(&dir)?
        );
        if geometry.is_box() {
            println!("  {} vertices, first {:?}", r.vertices()?.len(), r.vertices()?[0]);
        }
    }
    let x = Vector::from([2.9, 1.1]);
    println!("error scale at x*: ellipsoid {:.4}, L1 box {:.4}", estimation::rho(&g, &x, &params, RegionGeometry::Ellipsoid)?, estimation::rho(&g, &x, &params, RegionGeometry::BoxL1)?);
    Ok(all_cover)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()?;
    Ok(())
}
