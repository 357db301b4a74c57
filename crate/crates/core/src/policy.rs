//! Action selection: the doubly-optimistic policy, the pessimistic
//! Thompson-sampling baseline and a clairvoyant oracle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::RngState;
use crate::estimation::{self, ConfidenceRegion, EstimationError, GramState, RadiusParams, RegionGeometry};
use crate::instance::{InstanceError, ProblemInstance, PublicView};
use crate::lp::{self, LpError, LpProblem, LpStatus};
use crate::numeric::{Vector, TOL};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("no combination of confidence-region vertices admits a feasible action")]
    PermissibleEmpty,
    #[error("pessimistic set is empty and no safe fallback action is available")]
    NoSafeFallback,
    #[error("vertex enumeration needs {needed} LPs, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: usize },
    #[error("action LP is unbounded; the known domain must be bounded")]
    Unbounded,
    #[error("geometry {0:?} cannot drive vertex enumeration")]
    Geometry(RegionGeometry),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

pub type Result<T> = std::result::Result<T, PolicyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Doslb,
    #[serde(rename = "safelts")]
    SafeLts,
    Oracle,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Doslb => "doslb",
            PolicyKind::SafeLts => "safelts",
            PolicyKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackMode {
    /// Optimize over the known constraints alone and flag the round.
    #[default]
    KnownOnly,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// `BoxL1` or `BoxLinf`.
    pub geometry: RegionGeometry,
    pub radius: RadiusParams,
    /// Scale of the Thompson perturbation.
    pub lts_inflation: f64,
    /// Power of `beta` in the perturbation scale (0.5 gives `sqrt(beta)`).
    pub lts_beta_exponent: f64,
    pub lts_safe_fallback: Option<Vector>,
    pub fallback: FallbackMode,
    /// Largest number of LPs one selection may solve.
    pub lp_budget: usize,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, radius: RadiusParams) -> Self {
        PolicyConfig {
            kind,
            geometry: RegionGeometry::BoxL1,
            radius,
            lts_inflation: 1.0,
            lts_beta_exponent: 0.5,
            lts_safe_fallback: None,
            fallback: FallbackMode::KnownOnly,
            lp_budget: 1_000_000,
        }
    }
}

/// Which region vertices produced the chosen action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexChoice {
    pub reward: usize,
    pub constraints: Vec<usize>,
}

/// Counts of LP outcomes over one enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LpGrid {
    pub solved: usize,
    pub feasible: usize,
    pub infeasible: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub x: Vector,
    /// `<theta_tilde, x>` for the reward parameter the policy committed to.
    pub optimistic_value: f64,
    pub theta_tilde: Vector,
    pub vertex_choice: Option<VertexChoice>,
    pub grid: LpGrid,
    /// Rows of the winning LP (known rows plus chosen unknown rows) met with equality within 1e-6.
    pub tight_rows: usize,
    pub permissible_empty_fallback: bool,
    pub safe_fallback: bool,
}

fn count_tight(rows: &[(Vector, f64)], x: &Vector) -> usize {
    rows.iter()
        .filter(|(a, b)| (a.dot(x) - b).abs() <= TOL.association * (1.0 + b.abs()))
        .count()
}

fn enumeration_size(reward: usize, per_constraint: &[usize]) -> u128 {
    per_constraint.iter().fold(reward as u128, |acc, &n| acc.saturating_mul(n as u128))
}

/// Selects an action from the learner's state with the doubly-optimistic rule.
pub fn doslb_select(view: &PublicView, g: &GramState, cfg: &PolicyConfig) -> Result<Decision> {
    if !cfg.geometry.is_box() {
        return Err(PolicyError::Geometry(cfg.geometry));
    }
    let (reward, cons) = estimation::all_regions(g, cfg.geometry, &cfg.radius)?;
    doslb_select_in(view, &reward, &cons, cfg)
}

/// The doubly-optimistic rule for explicitly given regions: every combination
/// of one reward vertex and one vertex per unknown constraint defines an LP;
/// the best feasible LP (first in lexicographic order on ties) wins.
pub fn doslb_select_in(
    view: &PublicView,
    reward: &ConfidenceRegion,
    constraints: &[ConfidenceRegion],
    cfg: &PolicyConfig,
) -> Result<Decision> {
    let reward_vertices = reward.vertices()?;
    let cons_vertices: Vec<Vec<Vector>> =
        constraints.iter().map(|c| c.vertices()).collect::<std::result::Result<_, _>>()?;
    let counts: Vec<usize> = cons_vertices.iter().map(|v| v.len()).collect();
    let needed = enumeration_size(reward_vertices.len(), &counts);
    if needed > cfg.lp_budget as u128 {
        return Err(PolicyError::BudgetExceeded { needed, budget: cfg.lp_budget });
    }

    let mut grid = LpGrid::default();
    let mut best: Option<(f64, Vector, VertexChoice)> = None;
    let mut choice = vec![0usize; counts.len()];
    loop {
        let mut base = view.known_lp(Vector::zeros(view.d));
        for (j, &c) in choice.iter().enumerate() {
            base.add_ineq(&cons_vertices[j][c], view.unknown_levels[j])?;
        }
        for (ri, theta) in reward_vertices.iter().enumerate() {
            let mut p = base.clone();
            p.objective = theta.clone();
            let s = lp::solve(&p)?;
            grid.solved += 1;
            match s.status {
                LpStatus::Infeasible => {
                    // the rows are shared by every reward vertex, so skip the rest
                    grid.infeasible += 1;
                    break;
                }
                LpStatus::Unbounded => return Err(PolicyError::Unbounded),
                LpStatus::Optimal => {
                    grid.feasible += 1;
                    let candidate = VertexChoice { reward: ri, constraints: choice.clone() };
                    let better = match &best {
                        None => true,
                        Some((v, _, bc)) => {
                            s.value > *v + 1e-12 * (1.0 + v.abs())
                                || ((s.value - v).abs() <= 1e-12 * (1.0 + v.abs()) && lex_less(&candidate, bc))
                        }
                    };
                    if better {
                        best = Some((s.value, s.x, candidate));
                    }
                }
            }
        }
        if !advance(&mut choice, &counts) {
            break;
        }
    }

    match best {
        Some((value, x, vc)) => {
            let mut rows = view.known.clone();
            for (j, &c) in vc.constraints.iter().enumerate() {
                rows.push((cons_vertices[j][c].clone(), view.unknown_levels[j]));
            }
            Ok(Decision {
                tight_rows: count_tight(&rows, &x),
                theta_tilde: reward_vertices[vc.reward].clone(),
                x,
                optimistic_value: value,
                vertex_choice: Some(vc),
                grid,
                permissible_empty_fallback: false,
                safe_fallback: false,
            })
        }
        None => match cfg.fallback {
            FallbackMode::Error => Err(PolicyError::PermissibleEmpty),
            FallbackMode::KnownOnly => {
                let mut best: Option<(f64, Vector, usize)> = None;
                for (ri, theta) in reward_vertices.iter().enumerate() {
                    let s = lp::solve(&view.known_lp(theta.clone()))?;
                    grid.solved += 1;
                    match s.status {
                        LpStatus::Optimal => {
                            if best.as_ref().is_none_or(|(v, _, _)| s.value > *v + 1e-12 * (1.0 + v.abs())) {
                                best = Some((s.value, s.x, ri));
                            }
                        }
                        LpStatus::Unbounded => return Err(PolicyError::Unbounded),
                        LpStatus::Infeasible => return Err(PolicyError::PermissibleEmpty),
                    }
                }
                let (value, x, ri) = best.ok_or(PolicyError::PermissibleEmpty)?;
                Ok(Decision {
                    tight_rows: count_tight(&view.known, &x),
                    theta_tilde: reward_vertices[ri].clone(),
                    x,
                    optimistic_value: value,
                    vertex_choice: None,
                    grid,
                    permissible_empty_fallback: true,
                    safe_fallback: false,
                })
            }
        },
    }
}

fn lex_less(a: &VertexChoice, b: &VertexChoice) -> bool {
    (a.reward, &a.constraints) < (b.reward, &b.constraints)
}

/// Mixed-radix increment with the last digit fastest; false once wrapped.
fn advance(choice: &mut [usize], counts: &[usize]) -> bool {
    for j in (0..choice.len()).rev() {
        choice[j] += 1;
        if choice[j] < counts[j] {
            return true;
        }
        choice[j] = 0;
    }
    false
}

/// Safe linear Thompson sampling: perturb the reward estimate, then maximize
/// over actions that satisfy every unknown constraint for every vertex of its
/// confidence region.
pub fn safelts_select(view: &PublicView, g: &GramState, cfg: &PolicyConfig, rng: &mut RngState) -> Result<Decision> {
    if !cfg.geometry.is_box() {
        return Err(PolicyError::Geometry(cfg.geometry));
    }
    let (_, cons) = estimation::all_regions(g, cfg.geometry, &cfg.radius)?;
    let eta = rng.normal_vector(view.d);
    let scale = cfg.lts_inflation * estimation::beta(g, &cfg.radius).powf(cfg.lts_beta_exponent);
    let theta = g.theta_hat().add(&g.factor().inv_sqrt().mul_vec(&eta).expect("dimension d").scaled(scale));
    safelts_select_in(view, &theta, &cons, cfg)
}

/// The pessimistic step for a given sampled reward vector and regions.
pub fn safelts_select_in(
    view: &PublicView,
    theta: &Vector,
    constraints: &[ConfidenceRegion],
    cfg: &PolicyConfig,
) -> Result<Decision> {
    let mut p = view.known_lp(theta.clone());
    for (j, region) in constraints.iter().enumerate() {
        for v in region.vertices()? {
            p.add_ineq(&v, view.unknown_levels[j])?;
        }
    }
    let s = lp::solve(&p)?;
    let grid = LpGrid { solved: 1, feasible: usize::from(s.is_optimal()), infeasible: usize::from(!s.is_optimal()) };
    match s.status {
        LpStatus::Optimal => {
            let rows: Vec<(Vector, f64)> = p
                .ineq_lhs
                .rows_iter()
                .zip(p.ineq_rhs.iter())
                .map(|(r, b)| (Vector::from_slice(r), *b))
                .collect();
            Ok(Decision {
                tight_rows: count_tight(&rows, &s.x),
                x: s.x,
                optimistic_value: s.value,
                theta_tilde: theta.clone(),
                vertex_choice: None,
                grid,
                permissible_empty_fallback: false,
                safe_fallback: false,
            })
        }
        LpStatus::Unbounded => Err(PolicyError::Unbounded),
        LpStatus::Infeasible => {
            let origin = Vector::zeros(view.d);
            let x = match &cfg.lts_safe_fallback {
                Some(x) => x.clone(),
                None if view.known_satisfied(&origin, TOL.lp_feasibility) => origin,
                None => return Err(PolicyError::NoSafeFallback),
            };
            Ok(Decision {
                tight_rows: count_tight(&view.known, &x),
                optimistic_value: theta.dot(&x),
                theta_tilde: theta.clone(),
                x,
                vertex_choice: None,
                grid,
                permissible_empty_fallback: false,
                safe_fallback: true,
            })
        }
    }
}

/// Plays the true optimum.
pub fn oracle_select(p: &ProblemInstance) -> Result<Decision> {
    let (x, value) = p.optimum()?;
    let view = p.public_view();
    Ok(Decision {
        tight_rows: count_tight(&view.known, &x),
        x,
        optimistic_value: value,
        theta_tilde: p.theta_star.clone(),
        vertex_choice: None,
        grid: LpGrid { solved: 1, feasible: 1, infeasible: 0 },
        permissible_empty_fallback: false,
        safe_fallback: false,
    })
}

/// Re-solves the LP of a winning vertex choice; used to audit decisions.
pub fn resolve_choice(
    view: &PublicView,
    reward: &ConfidenceRegion,
    constraints: &[ConfidenceRegion],
    choice: &VertexChoice,
) -> Result<LpProblem> {
    let theta = reward.vertices()?[choice.reward].clone();
    let mut p = view.known_lp(theta);
    for (j, &c) in choice.constraints.iter().enumerate() {
        p.add_ineq(&constraints[j].vertices()?[c], view.unknown_levels[j])?;
    }
    Ok(p)
}
