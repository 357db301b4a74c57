//! Dense two-phase simplex for small linear programs with free variables.
//!
//! Problems are stated as
//!
//! ```text
//! maximize   <c, x>
//! subject to A_eq x  = b_eq
//!            A_in x <= b_in
//!            x free
//! ```
//!
//! Free variables are split into nonnegative parts. Pivoting follows Bland's
//! rule (lowest eligible index enters, lowest basic index leaves on ratio
//! ties), so identical problems always produce identical solutions. Dual
//! multipliers are read off the final basis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{Matrix, NumericError, Vector, TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Malformed(#[from] NumericError),
    #[error("problem too large: {vars} variables, {constraints} constraints (limit 200)")]
    TooLarge { vars: usize, constraints: usize },
    #[error("simplex did not terminate within {0} pivots")]
    NumericalFailure(usize),
}

pub type Result<T> = std::result::Result<T, LpError>;

const MAX_SIZE: usize = 200;
/// Reduced costs below this are treated as nonpositive.
const REDUCED_COST_TOL: f64 = 1e-10;
const ZERO_FLUSH: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vector,
    pub eq_lhs: Matrix,
    pub eq_rhs: Vector,
    pub ineq_lhs: Matrix,
    pub ineq_rhs: Vector,
}

impl LpProblem {
    /// An unconstrained maximization of `<objective, x>`; add rows with the `with_*` builders.
    pub fn maximize(objective: Vector) -> Self {
        let n = objective.dim();
        LpProblem {
            objective,
            eq_lhs: Matrix::zeros(0, n),
            eq_rhs: Vector::zeros(0),
            ineq_lhs: Matrix::zeros(0, n),
            ineq_rhs: Vector::zeros(0),
        }
    }

    /// Minimization as maximization of the negated objective; the reported value is minus the minimum.
    pub fn minimize(objective: &Vector) -> Self {
        Self::maximize(objective.scaled(-1.0))
    }

    pub fn with_eq(mut self, row: &[f64], rhs: f64) -> Result<Self> {
        self.add_eq(row, rhs)?;
        Ok(self)
    }

    pub fn with_ineq(mut self, row: &[f64], rhs: f64) -> Result<Self> {
        self.add_ineq(row, rhs)?;
        Ok(self)
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) -> Result<()> {
        self.eq_lhs.push_row(row)?;
        self.eq_rhs.0.push(rhs);
        Ok(())
    }

    pub fn add_ineq(&mut self, row: &[f64], rhs: f64) -> Result<()> {
        self.ineq_lhs.push_row(row)?;
        self.ineq_rhs.0.push(rhs);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.dim()
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        let dims = [
            (n, self.eq_lhs.cols()),
            (n, self.ineq_lhs.cols()),
            (self.eq_lhs.rows(), self.eq_rhs.dim()),
            (self.ineq_lhs.rows(), self.ineq_rhs.dim()),
        ];
        for (expected, found) in dims {
            if expected != found {
                return Err(NumericError::DimensionMismatch { expected, found }.into());
            }
        }
        let finite = self.objective.is_finite()
            && self.eq_lhs.is_finite()
            && self.eq_rhs.is_finite()
            && self.ineq_lhs.is_finite()
            && self.ineq_rhs.is_finite();
        if !finite {
            return Err(NumericError::NonFinite.into());
        }
        let m = self.eq_lhs.rows() + self.ineq_lhs.rows();
        if n > MAX_SIZE || m > MAX_SIZE {
            return Err(LpError::TooLarge { vars: n, constraints: m });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal optimum; empty unless `Optimal`.
    pub x: Vector,
    /// Optimal value; `-inf` when infeasible and `+inf` when unbounded.
    pub value: f64,
    /// Multipliers of the equality rows (free sign).
    pub dual_eq: Vector,
    /// Multipliers of the inequality rows (nonnegative).
    pub dual_ineq: Vector,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_point(status: LpStatus, value: f64) -> Self {
        LpSolution {
            status,
            x: Vector::zeros(0),
            value,
            dual_eq: Vector::zeros(0),
            dual_ineq: Vector::zeros(0),
        }
    }
}

/// Standard-form tableau `T x = rhs, x >= 0` with a tracked basis.
struct Tableau {
    rows: usize,
    cols: usize,
    /// row-major, `cols + 1` entries per row (last one is the rhs)
    data: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    pivot_cap: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.pivot_cap {
            return Err(LpError::NumericalFailure(self.pivot_cap));
        }
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        self.data[pr * w + pc] = 1.0;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.data[r * w + c] - f * self.data[pr * w + c];
                self.data[r * w + c] = if v.abs() < ZERO_FLUSH { 0.0 } else { v };
            }
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
        Ok(())
    }

    fn reduced_cost(&self, cost: &[f64], c: usize) -> f64 {
        let mut d = cost[c];
        for r in 0..self.rows {
            d -= cost[self.basis[r]] * self.at(r, c);
        }
        d
    }

    /// Maximizes `cost . x` over the current tableau using columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<Outcome> {
        loop {
            let entering = (0..self.cols).find(|&c| {
                allowed[c] && !self.basis.contains(&c) && self.reduced_cost(cost, c) > REDUCED_COST_TOL
            });
            let Some(ec) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, ec);
                if a <= TOL.lp_pivot {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if (!tie && ratio < bratio) || (tie && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(Outcome::Unbounded),
                Some((lr, _)) => self.pivot(lr, ec)?,
            }
        }
    }

    fn value_of(&self, c: usize) -> f64 {
        self.basis.iter().position(|&b| b == c).map_or(0.0, |r| self.rhs(r))
    }
}

/// Layout of the standard form built from an [`LpProblem`].
struct StandardForm {
    tableau: Tableau,
    n: usize,
    n_slack: usize,
    n_art: usize,
    /// sign each original row was multiplied by so its rhs is nonnegative
    row_sign: Vec<f64>,
    /// column that formed the initial identity basis for each row
    initial_basis: Vec<usize>,
    rhs_scale: f64,
}

impl StandardForm {
    fn build(p: &LpProblem) -> StandardForm {
        let n = p.num_vars();
        let me = p.eq_lhs.rows();
        let mi = p.ineq_lhs.rows();
        let m = me + mi;
        let n_slack = mi;
        let mut row_sign = Vec::with_capacity(m);
        let mut needs_art = Vec::with_capacity(m);
        for r in 0..m {
            let b = if r < me { p.eq_rhs[r] } else { p.ineq_rhs[r - me] };
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            row_sign.push(sign);
            needs_art.push(r < me || sign < 0.0);
        }
        let n_art = needs_art.iter().filter(|&&a| a).count();
        let cols = 2 * n + n_slack + n_art;
        let w = cols + 1;
        let mut data = vec![0.0; m * w];
        let mut basis = vec![0; m];
        let mut art = 0;
        let mut rhs_scale: f64 = 0.0;
        for r in 0..m {
            let (row, b) = if r < me {
                (p.eq_lhs.row(r), p.eq_rhs[r])
            } else {
                (p.ineq_lhs.row(r - me), p.ineq_rhs[r - me])
            };
            let s = row_sign[r];
            for j in 0..n {
                data[r * w + 2 * j] = s * row[j];
                data[r * w + 2 * j + 1] = -s * row[j];
            }
            if r >= me {
                data[r * w + 2 * n + (r - me)] = s;
            }
            data[r * w + cols] = s * b;
            rhs_scale = rhs_scale.max(b.abs());
            if needs_art[r] {
                let c = 2 * n + n_slack + art;
                data[r * w + c] = 1.0;
                basis[r] = c;
                art += 1;
            } else {
                basis[r] = 2 * n + (r - me);
            }
        }
        let initial_basis = basis.clone();
        StandardForm {
            tableau: Tableau {
                rows: m,
                cols,
                data,
                basis,
                pivots: 0,
                pivot_cap: (10 * (cols + m)).max(50),
            },
            n,
            n_slack,
            n_art,
            row_sign,
            initial_basis,
            rhs_scale,
        }
    }

    fn is_artificial(&self, c: usize) -> bool {
        c >= 2 * self.n + self.n_slack
    }

    /// Phase 1: returns whether a feasible basis was found.
    fn phase_one(&mut self) -> Result<bool> {
        if self.n_art == 0 {
            return Ok(true);
        }
        let cols = self.tableau.cols;
        let cost: Vec<f64> = (0..cols).map(|c| if self.is_artificial(c) { -1.0 } else { 0.0 }).collect();
        let allowed = vec![true; cols];
        self.tableau.optimize(&cost, &allowed)?;
        let infeasibility: f64 = (0..cols)
            .filter(|&c| self.is_artificial(c))
            .map(|c| self.tableau.value_of(c))
            .sum();
        if infeasibility > TOL.lp_feasibility * (1.0 + self.rhs_scale) {
            return Ok(false);
        }
        // drive remaining artificials out of the basis where possible
        for r in 0..self.tableau.rows {
            if !self.is_artificial(self.tableau.basis[r]) {
                continue;
            }
            let col = (0..2 * self.n + self.n_slack)
                .find(|&c| !self.tableau.basis.contains(&c) && self.tableau.at(r, c).abs() > TOL.lp_pivot);
            if let Some(c) = col {
                self.tableau.pivot(r, c)?;
            }
            // otherwise the row is redundant; its artificial stays basic at zero
        }
        Ok(true)
    }

    fn point(&self) -> Vector {
        Vector(
            (0..self.n)
                .map(|j| self.tableau.value_of(2 * j) - self.tableau.value_of(2 * j + 1))
                .collect(),
        )
    }
}

/// Solves `p`, returning status, primal point, value and dual multipliers.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    p.check()?;
    let mut sf = StandardForm::build(p);
    if !sf.phase_one()? {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, f64::NEG_INFINITY));
    }
    let n = sf.n;
    let cols = sf.tableau.cols;
    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[2 * j] = p.objective[j];
        cost[2 * j + 1] = -p.objective[j];
    }
    let allowed: Vec<bool> = (0..cols).map(|c| !sf.is_artificial(c)).collect();
    if let Outcome::Unbounded = sf.tableau.optimize(&cost, &allowed)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, f64::INFINITY));
    }
    let x = sf.point();
    let value = p.objective.dot(&x);

    // y^T = c_B^T B^{-1}; the columns of the initial identity basis hold B^{-1}.
    let m = sf.tableau.rows;
    let me = p.eq_lhs.rows();
    let mut dual_eq = Vector::zeros(me);
    let mut dual_ineq = Vector::zeros(m - me);
    for r in 0..m {
        let col = sf.initial_basis[r];
        let y: f64 = (0..m).map(|k| cost[sf.tableau.basis[k]] * sf.tableau.at(k, col)).sum();
        // the identity column of a slack-started row carries the row sign already
        let mult = sf.row_sign[r] * y;
        if r < me {
            dual_eq[r] = mult;
        } else {
            dual_ineq[r - me] = mult;
        }
    }
    Ok(LpSolution { status: LpStatus::Optimal, x, value, dual_eq, dual_ineq })
}

/// Phase-1 feasibility test; returns a witness point when feasible.
pub fn feasible(p: &LpProblem) -> Result<Option<Vector>> {
    p.check()?;
    let mut sf = StandardForm::build(p);
    if sf.phase_one()? {
        Ok(Some(sf.point()))
    } else {
        Ok(None)
    }
}

/// Violations of the four optimality certificates of an `Optimal` solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    pub primal_infeasibility: f64,
    pub dual_sign_violation: f64,
    pub stationarity_residual: f64,
    pub duality_gap: f64,
    pub complementary_slackness: f64,
}

impl CertificateReport {
    /// Checks against the crate tolerances: feasibility 1e-8, dual sign 1e-9,
    /// duality gap and slackness 1e-7 (the gap relative to `1 + |value|`).
    pub fn holds(&self, value: f64) -> bool {
        self.primal_infeasibility <= TOL.lp_feasibility
            && self.dual_sign_violation <= 1e-9
            && self.duality_gap <= TOL.lp_duality_gap * (1.0 + value.abs())
            && self.complementary_slackness <= TOL.lp_duality_gap
            && self.stationarity_residual <= TOL.lp_duality_gap * (1.0 + value.abs())
    }
}

/// Evaluates the optimality certificates of `sol` against `p`.
pub fn certificates(p: &LpProblem, sol: &LpSolution) -> CertificateReport {
    let x = &sol.x;
    let mut infeas: f64 = 0.0;
    for r in 0..p.eq_lhs.rows() {
        let lhs: f64 = p.eq_lhs.row(r).iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        infeas = infeas.max((lhs - p.eq_rhs[r]).abs());
    }
    let mut slack_cs: f64 = 0.0;
    for r in 0..p.ineq_lhs.rows() {
        let lhs: f64 = p.ineq_lhs.row(r).iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        infeas = infeas.max(lhs - p.ineq_rhs[r]);
        slack_cs = slack_cs.max((sol.dual_ineq[r] * (p.ineq_rhs[r] - lhs)).abs());
    }
    let dual_sign = sol.dual_ineq.iter().fold(0.0f64, |m, &y| m.max(-y));
    let dual_value = sol.dual_eq.dot(&p.eq_rhs) + sol.dual_ineq.dot(&p.ineq_rhs);
    let mut stationarity: f64 = 0.0;
    for j in 0..p.num_vars() {
        let mut s = -p.objective[j];
        for r in 0..p.eq_lhs.rows() {
            s += sol.dual_eq[r] * p.eq_lhs[(r, j)];
        }
        for r in 0..p.ineq_lhs.rows() {
            s += sol.dual_ineq[r] * p.ineq_lhs[(r, j)];
        }
        stationarity = stationarity.max(s.abs());
    }
    CertificateReport {
        primal_infeasibility: infeas.max(0.0),
        dual_sign_violation: dual_sign,
        stationarity_residual: stationarity,
        duality_gap: (sol.value - dual_value).abs(),
        complementary_slackness: slack_cs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_certified(p: &LpProblem, s: &LpSolution) {
        let c = certificates(p, s);
        assert!(c.holds(s.value), "{c:?}");
    }

    #[test]
    fn separable_box() {
        let p = LpProblem::maximize(Vector::from([1.0, 1.0]))
            .with_ineq(&[1.0, 0.0], 1.0)
            .unwrap()
            .with_ineq(&[0.0, 1.0], 1.0)
            .unwrap()
            .with_ineq(&[-1.0, 0.0], 0.0)
            .unwrap()
            .with_ineq(&[0.0, -1.0], 0.0)
            .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.dual_ineq[0] - 1.0).abs() < 1e-12);
        assert!((s.dual_ineq[1] - 1.0).abs() < 1e-12);
        assert_certified(&p, &s);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        let p = LpProblem::maximize(Vector::from([1.0]))
            .with_eq(&[1.0], 1.0)
            .unwrap()
            .with_ineq(&[-1.0], -2.0)
            .unwrap();
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
        assert_eq!(feasible(&p).unwrap(), None);
    }

    #[test]
    fn unbounded_direction() {
        let p = LpProblem::maximize(Vector::from([1.0, 0.0])).with_ineq(&[0.0, 1.0], 1.0).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert_eq!(s.value, f64::INFINITY);
    }

    #[test]
    fn feasibility_witness() {
        let p = LpProblem::maximize(Vector::from([0.0]))
            .with_eq(&[1.0], 0.0)
            .unwrap()
            .with_ineq(&[1.0], 1.0)
            .unwrap();
        let w = feasible(&p).unwrap().expect("feasible");
        assert!(w[0].abs() < 1e-12);
        let p = LpProblem::maximize(Vector::from([0.0]))
            .with_eq(&[1.0], 0.0)
            .unwrap()
            .with_ineq(&[-1.0], -1.0)
            .unwrap();
        assert!(feasible(&p).unwrap().is_none());
    }

    #[test]
    fn redundant_equalities_keep_duals_consistent() {
        // x + y = 1 stated twice, maximize x with 0 <= x <= 0.75
        let p = LpProblem::maximize(Vector::from([1.0, 0.0]))
            .with_eq(&[1.0, 1.0], 1.0)
            .unwrap()
            .with_eq(&[2.0, 2.0], 2.0)
            .unwrap()
            .with_ineq(&[1.0, 0.0], 0.75)
            .unwrap()
            .with_ineq(&[0.0, -1.0], 0.0)
            .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 0.75).abs() < 1e-12);
        assert_certified(&p, &s);
    }

    #[test]
    fn negative_rhs_rows() {
        // maximize -x - y  s.t. x + y >= 2, x <= 5, y <= 5  (optimum value -2)
        let p = LpProblem::maximize(Vector::from([-1.0, -1.0]))
            .with_ineq(&[-1.0, -1.0], -2.0)
            .unwrap()
            .with_ineq(&[1.0, 0.0], 5.0)
            .unwrap()
            .with_ineq(&[0.0, 1.0], 5.0)
            .unwrap();
        let s = solve(&p).unwrap();
        assert!((s.value + 2.0).abs() < 1e-12);
        assert!((s.dual_ineq[0] - 1.0).abs() < 1e-12);
        assert_certified(&p, &s);
    }

    #[test]
    fn shape_errors() {
        let mut p = LpProblem::maximize(Vector::from([1.0, 1.0]));
        assert!(p.add_ineq(&[1.0], 1.0).is_err());
        p.ineq_rhs.0.push(3.0);
        assert!(matches!(solve(&p), Err(LpError::Malformed(_))));
    }

    #[test]
    fn deterministic_output() {
        let p = LpProblem::maximize(Vector::from([0.3, 0.7]))
            .with_ineq(&[1.0, 1.0], 1.0)
            .unwrap()
            .with_ineq(&[-1.0, 0.0], 0.0)
            .unwrap()
            .with_ineq(&[0.0, -1.0], 0.0)
            .unwrap();
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
