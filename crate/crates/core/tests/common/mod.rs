#![allow(dead_code)]

use doslb::environment::RngState;
use doslb::instance::combinations;
use doslb::lp::LpProblem;
use doslb::numeric::{self, Matrix, Vector};

/// A random LP over a bounded polytope with `n <= 5` variables and at most 8
/// inequality rows: shifted nonnegativity, one budget row and up to two
/// random cuts that keep a known interior point feasible.
pub fn random_bounded_lp(rng: &mut RngState) -> LpProblem {
    let n = 1 + (rng.next_u64() % 5) as usize;
    let lower: Vec<f64> = (0..n).map(|_| 4.0 * rng.uniform() - 2.0).collect();
    let budget = 1.0 + 5.0 * rng.uniform();
    let objective = Vector::from((0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect::<Vec<_>>());
    let mut lp = LpProblem::maximize(objective);
    for (i, l) in lower.iter().enumerate() {
        let mut row = vec![0.0; n];
        row[i] = -1.0;
        lp.add_ineq(&row, -l).unwrap();
    }
    let ones = vec![1.0; n];
    lp.add_ineq(&ones, lower.iter().sum::<f64>() + budget).unwrap();
    let interior: Vec<f64> = lower.iter().map(|l| l + budget / (2.0 * n as f64)).collect();
    let cuts = (rng.next_u64() % 3) as usize;
    for _ in 0..cuts.min(8 - (n + 1)) {
        let row: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let at: f64 = row.iter().zip(&interior).map(|(a, x)| a * x).sum();
        lp.add_ineq(&row, at + 0.5 * rng.uniform()).unwrap();
    }
    lp
}

/// Largest objective over all vertices of `{A x <= b}`, found by solving every
/// square subsystem.
pub fn brute_force_max(lp: &LpProblem) -> Option<f64> {
    let n = lp.objective.dim();
    let m = lp.ineq_lhs.rows();
    let mut best: Option<f64> = None;
    for rows in combinations(m, n) {
        let a = Matrix::from_rows(&rows.iter().map(|&r| lp.ineq_lhs.row(r).to_vec()).collect::<Vec<_>>(), n).unwrap();
        let b = Vector::from(rows.iter().map(|&r| lp.ineq_rhs[r]).collect::<Vec<_>>());
        let Some(x) = numeric::solve_general(&a, &b, 1e-12) else { continue };
        let feasible = (0..m).all(|r| {
            let lhs: f64 = lp.ineq_lhs.row(r).iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            lhs <= lp.ineq_rhs[r] + 1e-9
        });
        if feasible {
            let v = lp.objective.dot(&x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}
