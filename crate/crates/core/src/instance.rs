//! Problem instances: the latent safe linear program, its validation and the
//! built-in instance families.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, LpError, LpProblem, LpStatus};
use crate::numeric::{Matrix, Vector, TOL};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension { what: String, expected: usize, found: usize },
    #[error("instance has no constraints")]
    NoConstraints,
    #[error("known constraints must precede unknown ones (constraint {0} is known after an unknown one)")]
    Ordering(usize),
    #[error("non-finite value in instance data")]
    NonFinite,
    #[error("feasible set is empty")]
    EmptyFeasibleSet,
    #[error("reward is unbounded over the feasible set")]
    UnboundedOptimum,
    #[error("known domain is unbounded along coordinate {0}")]
    UnboundedDomain(usize),
    #[error("eps must lie in (0, 1/9], got {0}")]
    InvalidEps(f64),
    #[error("{what} must lie in [0, 1], got {value}")]
    OutOfRange { what: String, value: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("cannot parse instance: {0}")]
    Parse(String),
    #[error("cannot write instance: {0}")]
    Serialize(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, InstanceError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Known,
    Unknown,
}

/// One constraint `<vector, x> <= level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub vector: Vector,
    pub level: f64,
    pub visibility: Visibility,
}

impl Constraint {
    pub fn known(vector: impl Into<Vector>, level: f64) -> Self {
        Constraint { vector: vector.into(), level, visibility: Visibility::Known }
    }

    pub fn unknown(vector: impl Into<Vector>, level: f64) -> Self {
        Constraint { vector: vector.into(), level, visibility: Visibility::Unknown }
    }

    pub fn slack(&self, x: &Vector) -> f64 {
        self.level - self.vector.dot(x)
    }
}

/// A domain halfspace `<normal, x> <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

/// The full latent problem. Known constraints come first, then unknown ones;
/// constraint indices (0-based here, 1-based in reports) refer to this list.
/// Domain halfspaces are kept apart and never take part in index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub d: usize,
    pub theta_star: Vector,
    pub constraints: Vec<Constraint>,
    #[serde(default)]
    pub domain: Vec<Halfspace>,
}

/// What a learner is allowed to see: the known constraints (domain merged in)
/// and the levels of the unknown ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicView {
    pub d: usize,
    /// Known constraints in index order, followed by the domain halfspaces.
    pub known: Vec<(Vector, f64)>,
    /// Number of entries of `known` that are genuine constraints (the rest is domain).
    pub known_constraints: usize,
    pub unknown_levels: Vec<f64>,
}

impl PublicView {
    pub fn num_unknown(&self) -> usize {
        self.unknown_levels.len()
    }

    /// Whether `x` satisfies every known row within `tol`.
    pub fn known_satisfied(&self, x: &Vector, tol: f64) -> bool {
        self.known.iter().all(|(a, b)| a.dot(x) <= b + tol)
    }

    /// An LP over the known rows only.
    pub fn known_lp(&self, objective: Vector) -> LpProblem {
        let mut p = LpProblem::maximize(objective);
        for (a, b) in &self.known {
            p.add_ineq(a, *b).expect("known rows have dimension d");
        }
        p
    }
}

/// Output of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// Largest vertex norm of the known polytope.
    pub domain_radius: f64,
    /// Largest norm among the reward and constraint vectors.
    pub parameter_bound: f64,
    pub satisfies_a1: bool,
    pub satisfies_a2: bool,
    pub suggested_lambda: f64,
    /// Whether small perturbations of the reward keep the same optimum.
    pub optimum_unique: bool,
    pub warnings: Vec<String>,
}

impl ProblemInstance {
    /// Checks shapes, ordering, finiteness, nonempty feasible set and a bounded optimum.
    pub fn new(
        label: Option<String>,
        theta_star: Vector,
        constraints: Vec<Constraint>,
        domain: Vec<Halfspace>,
    ) -> Result<Self> {
        let p = ProblemInstance { label, d: theta_star.dim(), theta_star, constraints, domain };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let d = self.d;
        let dim = |what: String, found: usize| -> Result<()> {
            if found == d {
                Ok(())
            } else {
                Err(InstanceError::Dimension { what, expected: d, found })
            }
        };
        dim("theta_star".into(), self.theta_star.dim())?;
        if self.constraints.is_empty() {
            return Err(InstanceError::NoConstraints);
        }
        let mut seen_unknown = false;
        for (i, c) in self.constraints.iter().enumerate() {
            dim(format!("constraint {}", i + 1), c.vector.dim())?;
            if !c.vector.is_finite() || !c.level.is_finite() {
                return Err(InstanceError::NonFinite);
            }
            match c.visibility {
                Visibility::Unknown => seen_unknown = true,
                Visibility::Known if seen_unknown => return Err(InstanceError::Ordering(i + 1)),
                Visibility::Known => {}
            }
        }
        for (i, h) in self.domain.iter().enumerate() {
            dim(format!("domain halfspace {}", i + 1), h.normal.dim())?;
            if !h.normal.is_finite() || !h.offset.is_finite() {
                return Err(InstanceError::NonFinite);
            }
        }
        if !self.theta_star.is_finite() {
            return Err(InstanceError::NonFinite);
        }
        self.optimum()?;
        Ok(())
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_known(&self) -> usize {
        self.constraints.iter().filter(|c| c.visibility == Visibility::Known).count()
    }

    pub fn num_unknown(&self) -> usize {
        self.num_constraints() - self.num_known()
    }

    pub fn unknown_constraints(&self) -> &[Constraint] {
        &self.constraints[self.num_known()..]
    }

    pub fn public_view(&self) -> PublicView {
        let k = self.num_known();
        let mut known: Vec<(Vector, f64)> =
            self.constraints[..k].iter().map(|c| (c.vector.clone(), c.level)).collect();
        known.extend(self.domain.iter().map(|h| (h.normal.clone(), h.offset)));
        PublicView {
            d: self.d,
            known,
            known_constraints: k,
            unknown_levels: self.unknown_constraints().iter().map(|c| c.level).collect(),
        }
    }

    /// Rows of the known domain: known constraints then domain halfspaces.
    pub fn known_rows(&self) -> Vec<(Vector, f64)> {
        self.public_view().known
    }

    /// LP `max <objective, x>` over the feasible set (all constraints plus domain).
    pub fn feasible_lp(&self, objective: Vector) -> LpProblem {
        let mut p = LpProblem::maximize(objective);
        for c in &self.constraints {
            p.add_ineq(&c.vector, c.level).expect("checked dimensions");
        }
        for h in &self.domain {
            p.add_ineq(&h.normal, h.offset).expect("checked dimensions");
        }
        p
    }

    /// The optimal action and its reward.
    pub fn optimum(&self) -> Result<(Vector, f64)> {
        let s = lp::solve(&self.feasible_lp(self.theta_star.clone()))?;
        match s.status {
            LpStatus::Optimal => Ok((s.x, s.value)),
            LpStatus::Infeasible => Err(InstanceError::EmptyFeasibleSet),
            LpStatus::Unbounded => Err(InstanceError::UnboundedOptimum),
        }
    }

    /// Signed violations `<a^i, x> - alpha^i`, one per constraint.
    pub fn violations(&self, x: &Vector) -> Vec<f64> {
        self.constraints.iter().map(|c| -c.slack(x)).collect()
    }

    /// Constraint matrix restricted to `indices`, with the matching levels.
    pub fn rows(&self, indices: &[usize]) -> (Matrix, Vector) {
        let rows: Vec<Vec<f64>> = indices.iter().map(|&i| self.constraints[i].vector.0.clone()).collect();
        let levels = indices.iter().map(|&i| self.constraints[i].level).collect();
        (Matrix::from_rows(&rows, self.d).expect("checked dimensions"), Vector(levels))
    }

    /// Re-solves with `theta_star + 1e-7 u` for `u = +-e_j` and reports whether the optimum stays put.
    pub fn optimum_is_unique(&self) -> Result<bool> {
        let (x_star, _) = self.optimum()?;
        for j in 0..self.d {
            for s in [1.0, -1.0] {
                let objective = self.theta_star.axpy(1e-7 * s, &Vector::basis(self.d, j));
                let sol = lp::solve(&self.feasible_lp(objective))?;
                if !sol.is_optimal() || sol.x.sub(&x_star).norm() > 1e-5 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: ProblemInstance = toml::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        p.check()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| InstanceError::Serialize(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

fn axis_box(d: usize, half_width: f64) -> Vec<Halfspace> {
    let mut out = Vec::with_capacity(2 * d);
    for j in 0..d {
        for s in [1.0, -1.0] {
            out.push(Halfspace { normal: Vector::basis(d, j).scaled(s), offset: half_width });
        }
    }
    out
}

/// The two-dimensional running example: a triangle of known constraints cut by
/// one unknown constraint, enclosed in the box `[-8, 8]^2`.
pub fn running_example() -> ProblemInstance {
    running_example_with_level(0.55)
}

/// The running example with a different level for the unknown constraint
/// (`0.1` gives the hard case used in the baseline comparison).
pub fn running_example_with_level(level: f64) -> ProblemInstance {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let constraints = vec![
        Constraint::known([0.0, -1.0], 0.0),
        Constraint::known([-r, r], 0.0),
        Constraint::known([r, r], 2.0 * std::f64::consts::SQRT_2),
        Constraint::unknown([0.0, 0.5], level),
    ];
    let label = if level == 0.55 { "example1".to_string() } else { format!("example1 (unknown level {level})") };
    ProblemInstance::new(Some(label), Vector::from([0.1, 1.0]), constraints, axis_box(2, 8.0))
        .expect("running example is valid")
}

/// Level used for the unknown constraints of the lower-bound family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LowerBoundLevel {
    /// 1/4; keeps the effective gap at least 1/8 in every dimension.
    #[default]
    Basic,
    /// 1/2; the unknown constraints of negative sign never bind.
    Tensorized,
}

impl LowerBoundLevel {
    fn level(self) -> f64 {
        match self {
            LowerBoundLevel::Basic => 0.25,
            LowerBoundLevel::Tensorized => 0.5,
        }
    }
}

pub fn lower_bound_instance(d: usize, eps: f64, signs: &[f64]) -> Result<ProblemInstance> {
    lower_bound_instance_with_level(d, eps, signs, LowerBoundLevel::Basic)
}

/// Box `[-1, 1]^d` with one unknown constraint `(1 + s_i eps)/2 x_i <= level` per coordinate.
pub fn lower_bound_instance_with_level(
    d: usize,
    eps: f64,
    signs: &[f64],
    level: LowerBoundLevel,
) -> Result<ProblemInstance> {
    if !(eps > 0.0 && eps <= 1.0 / 9.0) {
        return Err(InstanceError::InvalidEps(eps));
    }
    if signs.len() != d {
        return Err(InstanceError::Dimension { what: "signs".into(), expected: d, found: signs.len() });
    }
    let mut constraints = Vec::with_capacity(3 * d);
    for i in 0..d {
        constraints.push(Constraint::known(Vector::basis(d, i), 1.0));
        constraints.push(Constraint::known(Vector::basis(d, i).scaled(-1.0), 1.0));
    }
    let lvl = level.level();
    for (i, &s) in signs.iter().enumerate() {
        let s = if s >= 0.0 { 1.0 } else { -1.0 };
        constraints.push(Constraint::unknown(Vector::basis(d, i).scaled((1.0 + s * eps) / 2.0), lvl));
    }
    let label = format!("lower-bound d={d} eps={eps}");
    ProblemInstance::new(Some(label), Vector(vec![1.0; d]), constraints, Vec::new())
}

/// Multi-armed bandit embedded on the probability simplex: arm means `mu`,
/// arm safety costs `nu`, safety level `alpha`.
pub fn simplex_mab_instance(mu: &[f64], nu: &[f64], alpha: f64) -> Result<ProblemInstance> {
    let d = mu.len();
    if nu.len() != d {
        return Err(InstanceError::Dimension { what: "nu".into(), expected: d, found: nu.len() });
    }
    for (what, v) in mu.iter().map(|v| ("mu", v)).chain(nu.iter().map(|v| ("nu", v))) {
        if !(0.0..=1.0).contains(v) {
            return Err(InstanceError::OutOfRange { what: what.into(), value: *v });
        }
    }
    let mut constraints = Vec::with_capacity(d + 3);
    for k in 0..d {
        constraints.push(Constraint::known(Vector::basis(d, k).scaled(-1.0), 0.0));
    }
    constraints.push(Constraint::known(vec![1.0; d], 1.0));
    constraints.push(Constraint::known(vec![-1.0; d], -1.0));
    constraints.push(Constraint::unknown(nu.to_vec(), alpha));
    ProblemInstance::new(Some(format!("simplex-mab d={d}")), Vector::from_slice(mu), constraints, Vec::new())
}

/// Vertices of the known polytope (known constraints plus domain).
pub fn known_vertices(p: &ProblemInstance) -> Vec<Vector> {
    let rows = p.known_rows();
    let d = p.d;
    let mut out: Vec<Vector> = Vec::new();
    for subset in combinations(rows.len(), d) {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| rows[i].0 .0.clone()).collect();
        let b = Vector(subset.iter().map(|&i| rows[i].1).collect());
        let a = Matrix::from_rows(&a, d).expect("rows have dimension d");
        let Some(x) = crate::numeric::solve_general(&a, &b, 1e-12) else { continue };
        let feasible = rows.iter().all(|(r, lvl)| r.dot(&x) <= lvl + 1e-9 * (1.0 + lvl.abs()));
        if feasible && !out.iter().any(|v| v.sub(&x).norm() < 1e-9) {
            out.push(x);
        }
    }
    out
}

/// Checks the boundedness and scale assumptions and recommends a regularizer.
pub fn validate(p: &ProblemInstance) -> Result<AssumptionReport> {
    let view = p.public_view();
    for j in 0..p.d {
        for s in [1.0, -1.0] {
            let sol = lp::solve(&view.known_lp(Vector::basis(p.d, j).scaled(s)))?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Unbounded => return Err(InstanceError::UnboundedDomain(j)),
                LpStatus::Infeasible => return Err(InstanceError::EmptyFeasibleSet),
            }
        }
    }
    let radius = known_vertices(p).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let parameter_bound =
        p.constraints.iter().map(|c| c.vector.norm()).fold(p.theta_star.norm(), f64::max);
    let satisfies_a1 = radius <= 1.0 + TOL.membership;
    let satisfies_a2 = parameter_bound <= 1.0 + TOL.membership;
    let optimum_unique = p.optimum_is_unique()?;
    let mut warnings = Vec::new();
    if !satisfies_a1 {
        warnings.push(format!("domain radius {radius:.6} exceeds 1; use lambda >= {:.6}", radius * radius));
    }
    if !satisfies_a2 {
        warnings.push(format!("parameter norm {parameter_bound:.6} exceeds 1"));
    }
    if !optimum_unique {
        warnings.push("optimum is not unique under small reward perturbations".into());
    }
    Ok(AssumptionReport {
        domain_radius: radius,
        parameter_bound,
        satisfies_a1,
        satisfies_a2,
        suggested_lambda: (radius * radius).max(1.0),
        optimum_unique,
        warnings,
    })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_example_optimum() {
        let p = running_example();
        let (x, v) = p.optimum().unwrap();
        assert!((x[0] - 2.9).abs() < 1e-9 && (x[1] - 1.1).abs() < 1e-9, "{x:?}");
        assert!((v - (0.1 * 2.9 + 1.1)).abs() < 1e-12);
        assert_eq!((p.num_known(), p.num_unknown()), (3, 1));
        assert!(p.optimum_is_unique().unwrap());
    }

    #[test]
    fn running_example_violates_unit_domain() {
        let r = validate(&running_example()).unwrap();
        assert!(!r.satisfies_a1);
        assert!((r.domain_radius - 4.0).abs() < 1e-9);
        assert!((r.suggested_lambda - 16.0).abs() < 1e-9);
    }

    #[test]
    fn unit_box_satisfies_assumptions() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let cons = vec![
            Constraint::known([1.0, 0.0], r),
            Constraint::known([-1.0, 0.0], r),
            Constraint::known([0.0, 1.0], r),
            Constraint::known([0.0, -1.0], r),
            Constraint::unknown([0.6, 0.8], 0.5),
        ];
        let p = ProblemInstance::new(None, Vector::from([0.0, 1.0]), cons, vec![]).unwrap();
        let rep = validate(&p).unwrap();
        assert!(rep.satisfies_a1 && rep.satisfies_a2);
        assert_eq!(rep.suggested_lambda, 1.0);
    }

    #[test]
    fn lower_bound_family() {
        let p = lower_bound_instance(1, 0.1, &[1.0]).unwrap();
        let u = &p.unknown_constraints()[0];
        assert!((u.vector[0] - 0.55).abs() < 1e-15 && u.level == 0.25);
        let rep = validate(&p).unwrap();
        assert!((rep.domain_radius - 1.0).abs() < 1e-12);
        assert!((rep.parameter_bound - 1.0).abs() < 1e-12);
        let (x, _) = p.optimum().unwrap();
        assert!((x[0] - 1.0 / (2.0 * 1.1)).abs() < 1e-12);
        for signs in [[1.0, -1.0], [-1.0, 1.0]] {
            let p = lower_bound_instance(2, 0.05, &signs).unwrap();
            assert!(p.violations(&Vector::zeros(2)).iter().all(|v| *v <= 0.0));
            assert_eq!(p.unknown_constraints()[0].level, 0.25);
        }
        let forced = lower_bound_instance_with_level(2, 0.05, &[1.0, 1.0], LowerBoundLevel::Tensorized).unwrap();
        assert_eq!(forced.unknown_constraints()[1].level, 0.5);
        assert!(matches!(lower_bound_instance(1, 0.2, &[1.0]), Err(InstanceError::InvalidEps(_))));
        assert!(matches!(lower_bound_instance(1, 0.0, &[1.0]), Err(InstanceError::InvalidEps(_))));
    }

    #[test]
    fn simplex_instances() {
        let mu = [0.5, 3f64.sqrt() / 4.0, 0.75];
        let p = simplex_mab_instance(&mu, &[0.0, 0.0, 1.0], 0.5).unwrap();
        // as a program over the simplex the optimum mixes arms 1 and 3
        let (x, v) = p.optimum().unwrap();
        assert!(x.sub(&Vector::from([0.5, 0.0, 0.5])).norm() < 1e-9);
        assert!((v - 0.625).abs() < 1e-12);
        for k in 0..3 {
            assert!(p.public_view().known_satisfied(&Vector::basis(3, k), 1e-12));
        }
        let z = simplex_mab_instance(&[0.0; 3], &[0.0; 3], 0.5).unwrap();
        assert_eq!(z.optimum().unwrap().1, 0.0);
        let elevated = simplex_mab_instance(&[0.3, 0.3, 0.6, 0.3], &[0.0; 4], 0.5).unwrap();
        assert!(elevated.optimum().unwrap().0.sub(&Vector::basis(4, 2)).norm() < 1e-9);
        assert!(matches!(
            simplex_mab_instance(&[1.2, 0.0], &[0.0, 0.0], 0.5),
            Err(InstanceError::OutOfRange { .. })
        ));
    }

    #[test]
    fn unbounded_domain_is_reported() {
        let cons = vec![Constraint::known([1.0, 0.0], 1.0), Constraint::unknown([0.0, 1.0], 1.0)];
        let p = ProblemInstance::new(None, Vector::from([1.0, 1.0]), cons, vec![]).unwrap();
        assert!(matches!(validate(&p), Err(InstanceError::UnboundedDomain(_))));
    }

    #[test]
    fn malformed_instances_are_rejected() {
        let cons = vec![Constraint::unknown([1.0, 0.0], 1.0), Constraint::known([0.0, 1.0], 1.0)];
        assert!(matches!(
            ProblemInstance::new(None, Vector::from([0.0, 0.0]), cons, vec![]),
            Err(InstanceError::Ordering(2))
        ));
        assert!(matches!(
            ProblemInstance::new(None, Vector::from([0.0, 0.0]), vec![], vec![]),
            Err(InstanceError::NoConstraints)
        ));
        let cons = vec![Constraint::known([1.0], 1.0), Constraint::known([-1.0], -2.0)];
        assert!(matches!(
            ProblemInstance::new(None, Vector::from([1.0]), cons, vec![]),
            Err(InstanceError::EmptyFeasibleSet)
        ));
    }

    #[test]
    fn toml_round_trip() {
        let p = running_example();
        let back = ProblemInstance::from_toml(&p.to_toml().unwrap()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn combination_enumeration() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}
