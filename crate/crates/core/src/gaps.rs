//! Gap analysis of polytopal instances: basic index sets, their association
//! with points of the known domain, the spread program and the efficiency,
//! feasibility and consistency gaps.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{self, ConfidenceRegion, EstimationError, GramState, RadiusParams, RegionGeometry};
use crate::instance::{combinations, InstanceError, ProblemInstance, PublicView};
use crate::lp::{self, LpError, LpProblem, LpStatus};
use crate::numeric::{Vector, TOL};

#[derive(Debug, Error)]
pub enum GapError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error("spread program is infeasible")]
    ProgramInfeasible,
    #[error("spread program is unbounded")]
    ProgramUnbounded,
    #[error("consistency gap needs {needed} subset pairs, budget is {budget}")]
    ExponentialBudgetExceeded { needed: u128, budget: u128 },
    #[error("no basic index set has a positive gap")]
    NoPositiveGap,
}

pub type Result<T> = std::result::Result<T, GapError>;

/// Separations at or below this are treated as zero.
const GAP_ZERO: f64 = 1e-9;
/// Default cap on subset pairs examined by the consistency gap.
pub const SUBSET_BUDGET: u128 = 1 << 16;

/// A basic index set: `d` sorted, distinct 0-based constraint indices.
/// Displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bis(pub Vec<usize>);

impl Bis {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Bis(indices)
    }

    /// From 1-based indices, as written in reports.
    pub fn one_based(indices: &[usize]) -> Self {
        Bis::new(indices.iter().map(|i| i - 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }
}

impl fmt::Display for Bis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociatedSet {
    UniquePoint(Vector),
    /// More than one point; carries one of them.
    AffinePiece(Vector),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisClassification {
    pub consistent: bool,
    pub associated: AssociatedSet,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadResult {
    pub value: f64,
    pub pi_witness: Vector,
    pub program_value: f64,
}

/// The index sets and constraint that attain a consistency gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyWitness {
    /// 1-based
    pub equalities: Vec<usize>,
    /// 1-based
    pub inequalities: Vec<usize>,
    /// 1-based
    pub constraint: usize,
    /// True for the inner separation (constraint of the set cannot be reached).
    pub inner: bool,
    pub separation: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityWitness {
    /// 1-based
    pub constraint: usize,
    pub separation: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisRecord {
    pub bis: Bis,
    pub classification: BisClassification,
    /// Efficiency separation before spread scaling.
    pub efficiency_separation: f64,
    pub efficiency_spread: f64,
    pub efficiency_gap: f64,
    pub feasibility_gap: f64,
    pub feasibility_witness: Option<FeasibilityWitness>,
    pub consistency_gap: f64,
    pub consistency_witness: Option<ConsistencyWitness>,
}

impl BisRecord {
    pub fn max_gap(&self) -> f64 {
        self.efficiency_gap.max(self.feasibility_gap).max(self.consistency_gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub x_star: Vector,
    pub optimal_value: f64,
    pub records: Vec<BisRecord>,
    /// Smallest strictly positive max-gap; BISs with all gaps zero are excluded.
    pub xi: f64,
    /// The BIS attaining `xi`.
    pub xi_bis: Bis,
    /// Human-readable remarks on gaps whose scaling changed them noticeably.
    pub flags: Vec<String>,
}

impl GapReport {
    pub fn record(&self, bis: &Bis) -> Option<&BisRecord> {
        self.records.iter().find(|r| &r.bis == bis)
    }

    pub fn optimal_bises(&self) -> Vec<Bis> {
        self.records.iter().filter(|r| r.classification.optimal).map(|r| r.bis.clone()).collect()
    }

    pub fn to_toml(&self) -> std::result::Result<String, String> {
        toml::to_string(self).map_err(|e| e.to_string())
    }
}

fn near_zero(v: f64) -> f64 {
    if v <= GAP_ZERO {
        0.0
    } else {
        v
    }
}

/// LP over `{A(I) x = alpha(I), x in known domain}`.
fn associated_lp(p: &ProblemInstance, bis: &Bis, objective: Vector) -> LpProblem {
    let mut lp = LpProblem::maximize(objective);
    for &i in bis.indices() {
        let c = &p.constraints[i];
        lp.add_eq(&c.vector, c.level).expect("checked dimensions");
    }
    for (a, b) in p.known_rows() {
        lp.add_ineq(&a, b).expect("checked dimensions");
    }
    lp
}

/// LP over `{A(eq) x = alpha(eq), A(ineq) x <= alpha(ineq)}` with no domain rows.
fn subset_lp(p: &ProblemInstance, eq: &[usize], ineq: &[usize], objective: Vector) -> LpProblem {
    let mut lp = LpProblem::maximize(objective);
    for &i in eq {
        lp.add_eq(&p.constraints[i].vector, p.constraints[i].level).expect("checked dimensions");
    }
    for &i in ineq {
        lp.add_ineq(&p.constraints[i].vector, p.constraints[i].level).expect("checked dimensions");
    }
    lp
}

/// Whether `x` meets every constraint of `bis` with equality within 1e-8.
pub fn is_associated(p: &ProblemInstance, bis: &Bis, x: &Vector) -> bool {
    bis.indices().iter().all(|&i| (p.constraints[i].vector.dot(x) - p.constraints[i].level).abs() <= 1e-8)
}

pub fn classify(p: &ProblemInstance, bis: &Bis) -> Result<BisClassification> {
    let (x_star, _) = p.optimum()?;
    classify_with(p, bis, &x_star)
}

fn classify_with(p: &ProblemInstance, bis: &Bis, x_star: &Vector) -> Result<BisClassification> {
    let Some(witness) = lp::feasible(&associated_lp(p, bis, Vector::zeros(p.d)))? else {
        return Ok(BisClassification { consistent: false, associated: AssociatedSet::Empty, optimal: false });
    };
    let mut unique = true;
    let mut point = witness.clone();
    for j in 0..p.d {
        let hi = lp::solve(&associated_lp(p, bis, Vector::basis(p.d, j)))?;
        let lo = lp::solve(&associated_lp(p, bis, Vector::basis(p.d, j).scaled(-1.0)))?;
        match (hi.status, lo.status) {
            (LpStatus::Optimal, LpStatus::Optimal) => {
                if hi.value + lo.value > 1e-8 {
                    unique = false;
                }
                if j == 0 {
                    point = hi.x;
                }
            }
            _ => unique = false,
        }
    }
    let associated = if unique { AssociatedSet::UniquePoint(point) } else { AssociatedSet::AffinePiece(witness) };
    Ok(BisClassification { consistent: true, associated, optimal: is_associated(p, bis, x_star) })
}

/// Spread of `v` with respect to constraint sets `l` (equalities) and `m`
/// (known inequalities): one plus the smallest L1 norm of the unknown-constraint
/// multipliers among optimal solutions of the dual program.
pub fn spread(p: &ProblemInstance, v: &Vector, l: &[usize], m: &[usize]) -> Result<SpreadResult> {
    let k = p.num_known();
    let lu: Vec<usize> = l.iter().cloned().filter(|&i| i >= k).collect();
    let lk: Vec<usize> = l.iter().cloned().filter(|&i| i < k).collect();
    let nu = lu.len();
    let cols: Vec<usize> = lu.iter().chain(&lk).chain(m).cloned().collect();
    let n = cols.len();
    let d = p.d;

    // stage 1: min <alpha, z> s.t. sum z_i a^i = v, sigma >= 0
    let cost: Vec<f64> = cols.iter().map(|&i| p.constraints[i].level).collect();
    let mut stage1 = LpProblem::maximize(Vector(cost.iter().map(|c| -c).collect()));
    for row in 0..d {
        let coeffs: Vec<f64> = cols.iter().map(|&i| p.constraints[i].vector[row]).collect();
        stage1.add_eq(&coeffs, v[row])?;
    }
    for s in nu + lk.len()..n {
        let mut r = vec![0.0; n];
        r[s] = -1.0;
        stage1.add_ineq(&r, 0.0)?;
    }
    let s1 = lp::solve(&stage1)?;
    let w_star = match s1.status {
        LpStatus::Optimal => -s1.value,
        LpStatus::Infeasible => return Err(GapError::ProgramInfeasible),
        LpStatus::Unbounded => return Err(GapError::ProgramUnbounded),
    };
    if nu == 0 {
        return Ok(SpreadResult { value: 1.0, pi_witness: Vector::zeros(0), program_value: w_star });
    }

    // stage 2: variables (pi+, pi-, rho, sigma); min sum(pi+ + pi-) over the optimal face
    let n2 = n + nu;
    let expand = |z: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(n2);
        out.extend_from_slice(&z[..nu]);
        out.extend(z[..nu].iter().map(|c| -c));
        out.extend_from_slice(&z[nu..]);
        out
    };
    let mut obj = vec![0.0; n2];
    obj[..2 * nu].iter_mut().for_each(|o| *o = -1.0);
    let mut stage2 = LpProblem::maximize(Vector(obj));
    for row in 0..d {
        let coeffs: Vec<f64> = cols.iter().map(|&i| p.constraints[i].vector[row]).collect();
        stage2.add_eq(&expand(&coeffs), v[row])?;
    }
    for s in (0..2 * nu).chain(2 * nu + lk.len()..n2) {
        let mut r = vec![0.0; n2];
        r[s] = -1.0;
        stage2.add_ineq(&r, 0.0)?;
    }
    stage2.add_ineq(&expand(&cost), w_star + TOL.lp_duality_gap * (1.0 + w_star.abs()))?;
    let s2 = lp::solve(&stage2)?;
    match s2.status {
        LpStatus::Optimal => {
            let pi = Vector((0..nu).map(|i| s2.x[i] - s2.x[nu + i]).collect());
            Ok(SpreadResult { value: 1.0 + pi.norm1(), pi_witness: pi, program_value: w_star })
        }
        LpStatus::Infeasible => Err(GapError::ProgramInfeasible),
        LpStatus::Unbounded => Err(GapError::ProgramUnbounded),
    }
}

fn known_complement(p: &ProblemInstance, exclude: &[usize]) -> Vec<usize> {
    (0..p.num_known()).filter(|i| !exclude.contains(i)).collect()
}

/// Efficiency separation and gap `(delta, spread, Delta)`; zero for inconsistent sets.
pub fn efficiency_parts(p: &ProblemInstance, bis: &Bis) -> Result<(f64, f64, f64)> {
    let (_, opt) = p.optimum()?;
    let s = lp::solve(&associated_lp(p, bis, p.theta_star.clone()))?;
    let delta = match s.status {
        LpStatus::Optimal => near_zero((opt - s.value).max(0.0)),
        _ => 0.0,
    };
    if delta == 0.0 {
        return Ok((0.0, 1.0, 0.0));
    }
    let sp = spread(p, &p.theta_star, bis.indices(), &known_complement(p, bis.indices()))?;
    Ok((delta, sp.value, delta / sp.value))
}

pub fn efficiency_gap(p: &ProblemInstance, bis: &Bis) -> Result<f64> {
    Ok(efficiency_parts(p, bis)?.2)
}

/// `inf <a^k, x> - alpha^k` over points associated with `bis`; `None` if there are none.
pub fn feasibility_separation(p: &ProblemInstance, bis: &Bis, k: usize) -> Result<Option<f64>> {
    let c = &p.constraints[k];
    let s = lp::solve(&associated_lp(p, bis, c.vector.scaled(-1.0)))?;
    Ok(match s.status {
        LpStatus::Optimal => Some(-s.value - c.level),
        LpStatus::Unbounded => Some(f64::NEG_INFINITY),
        LpStatus::Infeasible => None,
    })
}

fn feasibility_parts(p: &ProblemInstance, bis: &Bis) -> Result<(f64, Option<FeasibilityWitness>)> {
    let mut best = (0.0, None);
    for k in (0..p.num_constraints()).filter(|k| !bis.contains(*k)) {
        let Some(gamma) = feasibility_separation(p, bis, k)? else { return Ok((0.0, None)) };
        let gamma = near_zero(gamma);
        if gamma == 0.0 {
            continue;
        }
        let mut exclude = bis.indices().to_vec();
        exclude.push(k);
        let sp = spread(p, &p.constraints[k].vector.scaled(-1.0), bis.indices(), &known_complement(p, &exclude))?;
        let gap = gamma / sp.value;
        if gap > best.0 {
            best = (gap, Some(FeasibilityWitness { constraint: k + 1, separation: gamma, spread: sp.value }));
        }
    }
    Ok(best)
}

pub fn feasibility_gap(p: &ProblemInstance, bis: &Bis) -> Result<f64> {
    Ok(feasibility_parts(p, bis)?.0)
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << items.len())
        .map(|mask| items.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect())
        .collect()
}

fn consistency_parts(p: &ProblemInstance, bis: &Bis, budget: u128) -> Result<(f64, Option<ConsistencyWitness>)> {
    let outside = known_complement(p, bis.indices());
    let needed = 1u128 << (bis.indices().len() + outside.len()).min(127);
    if needed > budget {
        return Err(GapError::ExponentialBudgetExceeded { needed, budget });
    }
    let mut best: (f64, Option<ConsistencyWitness>) = (0.0, None);
    for eq in subsets(bis.indices()) {
        for ineq in subsets(&outside) {
            if lp::feasible(&subset_lp(p, &eq, &ineq, Vector::zeros(p.d)))?.is_none() {
                continue;
            }
            for k in (0..p.num_constraints()).filter(|k| !eq.contains(k) && !ineq.contains(k)) {
                let c = &p.constraints[k];
                let low = lp::solve(&subset_lp(p, &eq, &ineq, c.vector.scaled(-1.0)))?;
                if low.is_optimal() {
                    let outer = near_zero(-low.value - c.level);
                    if outer > 0.0 {
                        let sp = spread(p, &c.vector.scaled(-1.0), &eq, &ineq)?;
                        consider(&mut best, outer / sp.value, &eq, &ineq, k, false, outer, sp.value);
                    }
                }
                if bis.contains(k) {
                    let high = lp::solve(&subset_lp(p, &eq, &ineq, c.vector.clone()))?;
                    if high.is_optimal() {
                        let inner = near_zero(c.level - high.value);
                        if inner > 0.0 {
                            let sp = spread(p, &c.vector, &eq, &ineq)?;
                            consider(&mut best, inner / sp.value, &eq, &ineq, k, true, inner, sp.value);
                        }
                    }
                }
            }
        }
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn consider(
    best: &mut (f64, Option<ConsistencyWitness>),
    gap: f64,
    eq: &[usize],
    ineq: &[usize],
    k: usize,
    inner: bool,
    separation: f64,
    spread: f64,
) {
    if gap > best.0 {
        *best = (
            gap,
            Some(ConsistencyWitness {
                equalities: eq.iter().map(|i| i + 1).collect(),
                inequalities: ineq.iter().map(|i| i + 1).collect(),
                constraint: k + 1,
                inner,
                separation,
                spread,
            }),
        );
    }
}

/// Consistency gap of an inconsistent set (zero for consistent ones).
pub fn consistency_gap(p: &ProblemInstance, bis: &Bis) -> Result<f64> {
    if classify(p, bis)?.consistent {
        return Ok(0.0);
    }
    Ok(consistency_parts(p, bis, SUBSET_BUDGET)?.0)
}

/// All gaps of one basic index set.
pub fn analyze_bis(p: &ProblemInstance, bis: &Bis, x_star: &Vector) -> Result<BisRecord> {
    let classification = classify_with(p, bis, x_star)?;
    let mut rec = BisRecord {
        bis: bis.clone(),
        classification: classification.clone(),
        efficiency_separation: 0.0,
        efficiency_spread: 1.0,
        efficiency_gap: 0.0,
        feasibility_gap: 0.0,
        feasibility_witness: None,
        consistency_gap: 0.0,
        consistency_witness: None,
    };
    if classification.consistent {
        let (delta, sp, gap) = efficiency_parts(p, bis)?;
        rec.efficiency_separation = delta;
        rec.efficiency_spread = sp;
        rec.efficiency_gap = gap;
        let (fg, fw) = feasibility_parts(p, bis)?;
        rec.feasibility_gap = fg;
        rec.feasibility_witness = fw;
    } else {
        let (cg, cw) = consistency_parts(p, bis, SUBSET_BUDGET)?;
        rec.consistency_gap = cg;
        rec.consistency_witness = cw;
    }
    Ok(rec)
}

/// Enumerates every basic index set and assembles the gap report.
pub fn xi(p: &ProblemInstance) -> Result<GapReport> {
    let (x_star, optimal_value) = p.optimum()?;
    let sets: Vec<Bis> = combinations(p.num_constraints(), p.d).into_iter().map(Bis).collect();
    let records = sets
        .par_iter()
        .map(|b| analyze_bis(p, b, &x_star))
        .collect::<Result<Vec<_>>>()?;
    let (xi, xi_bis) = records
        .iter()
        .filter(|r| r.max_gap() > 0.0)
        .map(|r| (r.max_gap(), r.bis.clone()))
        .fold(None, |acc: Option<(f64, Bis)>, (g, b)| match acc {
            Some((best, bb)) if best <= g => Some((best, bb)),
            _ => Some((g, b)),
        })
        .ok_or(GapError::NoPositiveGap)?;
    let mut flags = Vec::new();
    for r in &records {
        if r.efficiency_separation > 0.0 && r.efficiency_spread > 1.0 + 1e-9 {
            flags.push(format!(
                "{}: efficiency separation {:.6} shrinks to gap {:.6} after dividing by spread {:.6}",
                r.bis, r.efficiency_separation, r.efficiency_gap, r.efficiency_spread
            ));
        }
        if !r.classification.consistent && r.consistency_gap == 0.0 {
            flags.push(format!("{}: inconsistent but no positive consistency separation found", r.bis));
        }
        if r.classification.consistent && !r.classification.optimal && r.max_gap() == 0.0 {
            flags.push(format!("{}: consistent, suboptimal and gap-free (degenerate instance?)", r.bis));
        }
    }
    Ok(GapReport { x_star, optimal_value, records, xi, xi_bis, flags })
}

/// Regions for every constraint: singletons for known ones, the learner's
/// regions for unknown ones. Index order matches the instance.
pub fn association_regions(
    view: &PublicView,
    g: &GramState,
    geometry: RegionGeometry,
    params: &RadiusParams,
) -> Result<Vec<ConfidenceRegion>> {
    let mut out: Vec<ConfidenceRegion> =
        view.known[..view.known_constraints].iter().map(|(a, _)| ConfidenceRegion::singleton(a.clone())).collect();
    for j in 0..view.num_unknown() {
        out.push(estimation::region(g, estimation::Target::Unknown(j), geometry, params)?);
    }
    Ok(out)
}

/// Levels of every constraint in index order.
pub fn all_levels(view: &PublicView) -> Vec<f64> {
    view.known[..view.known_constraints].iter().map(|(_, b)| *b).chain(view.unknown_levels.iter().cloned()).collect()
}

/// Basic index sets noisily associated with `x`: every `d`-subset of the
/// constraints that some parameter in their region meets with equality at `x`.
pub fn noisy_association(regions: &[ConfidenceRegion], levels: &[f64], x: &Vector) -> Result<Vec<Bis>> {
    let tol = TOL.association;
    let mut admitting = Vec::new();
    for (i, (r, &alpha)) in regions.iter().zip(levels).enumerate() {
        let admits = if r.geometry() == RegionGeometry::Known {
            (r.center().dot(x) - alpha).abs() <= tol
        } else {
            r.support_min(x)? <= alpha + tol && alpha <= r.support_max(x)? + tol
        };
        if admits {
            admitting.push(i);
        }
    }
    Ok(combinations(admitting.len(), x.dim())
        .into_iter()
        .map(|c| Bis(c.into_iter().map(|j| admitting[j]).collect()))
        .collect())
}

/// Per-arm gaps of a multi-armed bandit on the simplex (arms are basis vectors).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmGaps {
    /// 0-based index of the best arm meeting the safety level.
    pub optimal_arm: usize,
    /// `mu[optimal] - mu[i]` per arm.
    pub efficiency: Vec<f64>,
    /// `(nu[i] - alpha)^+` per arm.
    pub feasibility: Vec<f64>,
    /// Smallest positive efficiency gap among safe arms.
    pub min_efficiency: f64,
    /// Smallest positive feasibility gap.
    pub min_feasibility: f64,
}

/// Arm-level gaps of an instance whose single unknown constraint is the safety cost.
pub fn arm_gaps(p: &ProblemInstance) -> Option<ArmGaps> {
    let safety = p.unknown_constraints().first()?;
    let d = p.d;
    let mu: Vec<f64> = (0..d).map(|i| p.theta_star[i]).collect();
    let nu: Vec<f64> = (0..d).map(|i| safety.vector[i]).collect();
    let optimal_arm = (0..d)
        .filter(|&i| nu[i] <= safety.level)
        .fold(None, |b: Option<usize>, i| match b {
            Some(j) if mu[j] >= mu[i] => Some(j),
            _ => Some(i),
        })?;
    let efficiency: Vec<f64> = mu.iter().map(|m| mu[optimal_arm] - m).collect();
    let feasibility: Vec<f64> = nu.iter().map(|n| (n - safety.level).max(0.0)).collect();
    let min_pos = |v: &mut dyn Iterator<Item = f64>| v.filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min);
    Some(ArmGaps {
        optimal_arm,
        min_efficiency: min_pos(&mut (0..d).filter(|&i| feasibility[i] == 0.0).map(|i| efficiency[i])),
        min_feasibility: min_pos(&mut feasibility.iter().cloned()),
        efficiency,
        feasibility,
    })
}

/// Plain-text table of a gap report.
pub fn render_table(report: &GapReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "optimum x* = {:?}, value {:.6}\n",
        report.x_star.0.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>(),
        report.optimal_value
    ));
    out.push_str(&format!(
        "{:<10} {:<12} {:<22} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "BIS", "status", "point", "delta", "spread", "Delta", "Gamma", "Lambda"
    ));
    for r in &report.records {
        let status = if !r.classification.consistent {
            "inconsistent"
        } else if r.classification.optimal {
            "optimal"
        } else {
            "suboptimal"
        };
        let point = match &r.classification.associated {
            AssociatedSet::UniquePoint(x) => {
                format!("({})", x.iter().map(|v| format!("{:.4}", clean(*v))).collect::<Vec<_>>().join(", "))
            }
            AssociatedSet::AffinePiece(_) => "affine piece".into(),
            AssociatedSet::Empty => "-".into(),
        };
        out.push_str(&format!(
            "{:<10} {:<12} {:<22} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}\n",
            r.bis.to_string(),
            status,
            point,
            r.efficiency_separation,
            r.efficiency_spread,
            r.efficiency_gap,
            r.feasibility_gap,
            r.consistency_gap
        ));
    }
    out.push_str(&format!("Xi = {:.6} (attained at {})\n", report.xi, report.xi_bis));
    for f in &report.flags {
        out.push_str(&format!("note: {f}\n"));
    }
    out
}

fn clean(v: f64) -> f64 {
    if v.abs() < 5e-13 {
        0.0
    } else {
        v
    }
}
