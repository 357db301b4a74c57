//! Per-round accounting, cumulative regret curves and theoretical bound curves.
//!
//! Everything here may look at the latent instance; learners never do.

use serde::Serialize;
use thiserror::Error;

use crate::estimation::{self, EstimationError, GramState, RadiusParams, RegionGeometry, Target};
use crate::gaps::{self, Bis, GapError};
use crate::instance::{ProblemInstance, PublicView};
use crate::numeric::Vector;
use crate::policy::Decision;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gap must be positive, got {0}")]
    NonpositiveGap(f64),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Gap(#[from] GapError),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    pub x: Vector,
    pub reward: f64,
    /// `<theta*, x* - x_t>`; negative at unsafe points that beat the optimum.
    pub efficacy_gap: f64,
    /// `<a^i, x_t> - alpha^i` per constraint.
    pub violations: Vec<f64>,
    /// Error scale of the round (box-inflated when a box geometry is active).
    pub rho: f64,
    /// `||x_t||^2` in the inverse pre-round Gram norm.
    pub inv_norm_sq: f64,
    pub associated_bis_count: usize,
    pub optimally_associated: bool,
    pub permissible_empty: bool,
    pub safe_fallback: bool,
    /// Rows of the winning program met with equality.
    pub tight_rows: usize,
    /// Latent reward and constraint vectors inside the learner's regions of the active geometry.
    pub covered: bool,
    /// Same, for ellipsoidal regions.
    pub covered_ellipsoid: bool,
}

impl RoundRecord {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn instantaneous_regret(&self) -> f64 {
        self.efficacy_gap.max(self.max_violation().max(0.0))
    }

    /// Increment of the relaxed regret: violations up to `eps` are forgiven.
    pub fn relaxed_increment(&self, eps: f64) -> f64 {
        self.efficacy_gap.max((self.max_violation() - eps).max(0.0))
    }
}

/// Fixed per-run inputs of [`record_round`].
#[derive(Debug, Clone)]
pub struct RecordContext {
    pub instance: ProblemInstance,
    pub view: PublicView,
    pub optimal_value: f64,
    pub optimal_bises: Vec<Bis>,
    pub params: RadiusParams,
    /// Geometry of the regions used for association and the error scale.
    pub geometry: RegionGeometry,
}

impl RecordContext {
    pub fn new(instance: &ProblemInstance, optimal_bises: Vec<Bis>, params: RadiusParams, geometry: RegionGeometry) -> Result<Self> {
        let (_, optimal_value) = instance.optimum().map_err(GapError::from)?;
        Ok(RecordContext {
            view: instance.public_view(),
            instance: instance.clone(),
            optimal_value,
            optimal_bises,
            params,
            geometry,
        })
    }
}

fn covered(ctx: &RecordContext, g: &GramState, geometry: RegionGeometry) -> Result<bool> {
    let p = &ctx.instance;
    if !estimation::region(g, Target::Reward, geometry, &ctx.params)?.contains(&p.theta_star)? {
        return Ok(false);
    }
    for (j, c) in p.unknown_constraints().iter().enumerate() {
        if !estimation::region(g, Target::Unknown(j), geometry, &ctx.params)?.contains(&c.vector)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Builds the record of round `t` from the decision and the pre-round state.
pub fn record_round(ctx: &RecordContext, t: usize, decision: &Decision, reward: f64, g_before: &GramState) -> Result<RoundRecord> {
    let x = &decision.x;
    let p = &ctx.instance;
    let regions = gaps::association_regions(&ctx.view, g_before, ctx.geometry, &ctx.params)?;
    let sets = gaps::noisy_association(&regions, &gaps::all_levels(&ctx.view), x)?;
    let inv = g_before.inv_norm(x)?;
    Ok(RoundRecord {
        t,
        x: x.clone(),
        reward,
        efficacy_gap: ctx.optimal_value - p.theta_star.dot(x),
        violations: p.violations(x),
        rho: estimation::rho(g_before, x, &ctx.params, ctx.geometry)?,
        inv_norm_sq: inv * inv,
        associated_bis_count: sets.len(),
        optimally_associated: sets.iter().any(|s| ctx.optimal_bises.contains(s)),
        permissible_empty: decision.permissible_empty_fallback,
        safe_fallback: decision.safe_fallback,
        tight_rows: decision.tight_rows,
        covered: covered(ctx, g_before, ctx.geometry)?,
        covered_ellipsoid: covered(ctx, g_before, RegionGeometry::Ellipsoid)?,
    })
}

fn log_term(t: f64, d: f64, lambda: f64) -> f64 {
    (1.0 + t / (lambda * d)).ln()
}

/// General regret bound at horizon `t`.
pub fn bound_general(t: f64, d: usize, lambda: f64, delta: f64, unknown: usize) -> f64 {
    let d = d as f64;
    let l = log_term(t, d, lambda);
    4.0 * (t * d * l).sqrt() * (lambda.sqrt() + (0.5 * ((unknown as f64 + 1.0) / delta).ln() + d / 4.0 * l).sqrt())
}

/// Relaxed-regret bound for polytopal instances with effective gap `xi` and slack `eps`.
pub fn bound_polytope(t: f64, d: usize, lambda: f64, xi: f64, eps: f64) -> Result<f64> {
    for g in [xi, eps] {
        if !(g > 0.0) {
            return Err(MetricsError::NonpositiveGap(g));
        }
    }
    let d = d as f64;
    let l = log_term(t, d, lambda);
    Ok((1.0 / xi + 1.0 / eps) * (8.0 * d * d * l * l + 16.0 * d * lambda.sqrt() * l))
}

/// Bound on the number of rounds not associated with an optimal basic index set.
pub fn bound_bis_count(t: f64, d: usize, lambda: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(MetricsError::NonpositiveGap(xi));
    }
    let d = d as f64;
    let l = log_term(t, d, lambda);
    Ok(8.0 / (xi * xi) * (d * d * l * l + 2.0 * d * lambda.sqrt() * l))
}

/// Bound on the number of rounds whose worst violation exceeds `eps`.
pub fn bound_eps_violations(t: f64, d: usize, lambda: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(MetricsError::NonpositiveGap(eps));
    }
    let d = d as f64;
    let l = log_term(t, d, lambda);
    Ok((8.0 * d * d * l * l + 16.0 * d * lambda.sqrt() * l) / (eps * eps))
}

/// Right-hand side of the elliptical potential inequality for actions of norm at most `radius`.
pub fn potential_bound(t: f64, d: usize, lambda: f64, radius: f64) -> f64 {
    d as f64 * (1.0 + t * radius * radius / (lambda * d as f64)).ln()
}

/// Constants needed to draw the bound curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub d: usize,
    pub lambda: f64,
    pub delta: f64,
    pub unknown: usize,
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunSummary {
    pub eps: f64,
    pub regret: Vec<f64>,
    pub relaxed_regret: Vec<f64>,
    pub efficacy_regret: Vec<f64>,
    pub safety_regret: Vec<f64>,
    pub nonopt_bis_count: Vec<f64>,
    pub eps_violation_count: Vec<f64>,
    pub potential: Vec<f64>,
    pub bound_general: Vec<f64>,
    pub bound_polytope: Vec<f64>,
    pub bound_bis_count: Vec<f64>,
}

fn cumulative(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Cumulative curves of a run (records ordered by round).
pub fn summarize(records: &[RoundRecord], eps: f64) -> RunSummary {
    RunSummary {
        eps,
        regret: cumulative(records.iter().map(|r| r.instantaneous_regret())),
        relaxed_regret: cumulative(records.iter().map(|r| r.relaxed_increment(eps))),
        efficacy_regret: cumulative(records.iter().map(|r| r.efficacy_gap)),
        safety_regret: cumulative(records.iter().map(|r| r.max_violation().max(0.0))),
        nonopt_bis_count: cumulative(records.iter().map(|r| if r.optimally_associated { 0.0 } else { 1.0 })),
        eps_violation_count: cumulative(records.iter().map(|r| if r.max_violation() > eps { 1.0 } else { 0.0 })),
        potential: cumulative(records.iter().map(|r| r.inv_norm_sq)),
        ..RunSummary::default()
    }
}

impl RunSummary {
    pub fn horizon(&self) -> usize {
        self.regret.len()
    }

    /// Fills the bound curves; the gap-dependent ones stay empty without a gap.
    pub fn with_bounds(mut self, b: &BoundParams) -> Self {
        let ts = (1..=self.horizon()).map(|t| t as f64);
        self.bound_general = ts.clone().map(|t| bound_general(t, b.d, b.lambda, b.delta, b.unknown)).collect();
        if let Some(xi) = b.xi.filter(|x| *x > 0.0) {
            let eps = self.eps;
            self.bound_bis_count = ts.clone().map(|t| bound_bis_count(t, b.d, b.lambda, xi).unwrap_or(f64::NAN)).collect();
            if eps > 0.0 {
                self.bound_polytope = ts.map(|t| bound_polytope(t, b.d, b.lambda, xi, eps).unwrap_or(f64::NAN)).collect();
            }
        }
        self
    }

    pub fn last(curve: &[f64]) -> f64 {
        curve.last().copied().unwrap_or(0.0)
    }
}
