//! Regularized least squares, confidence radii and confidence regions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::Feedback;
use crate::numeric::{self, Matrix, NumericError, SpdFactorization, Vector, TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("feedback has {found} safety channels, expected {expected}")]
    FeedbackShape { expected: usize, found: usize },
    #[error("unknown constraint {index} out of range ({count} unknown constraints)")]
    NoSuchTarget { index: usize, count: usize },
    #[error("box with {0} dimensions has too many vertices (limit 12)")]
    TooManyVertices(usize),
    #[error("region geometry {0:?} has no finite vertex list")]
    NoVertices(RegionGeometry),
    #[error("invalid region: {0}")]
    InvalidRegion(&'static str),
}

pub type Result<T> = std::result::Result<T, EstimationError>;

const MAX_LINF_DIM: usize = 12;

/// Learner state: Gram matrix and response accumulators.
#[derive(Debug, Clone)]
pub struct GramState {
    lambda: f64,
    v: Matrix,
    xr: Vector,
    xs: Vec<Vector>,
    known_channels: usize,
    t: usize,
    factor: SpdFactorization,
    log_det: f64,
}

impl GramState {
    /// Fresh state `V = lambda I`. `known_channels` is the number of leading
    /// safety channels (known constraints) that `update` skips.
    pub fn new(d: usize, lambda: f64, known_channels: usize, unknown: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(EstimationError::InvalidRegion("lambda must be positive"));
        }
        let v = Matrix::scaled_identity(d, lambda);
        let factor = numeric::spd_sqrt(&v)?;
        Ok(GramState {
            lambda,
            log_det: d as f64 * lambda.ln(),
            v,
            xr: Vector::zeros(d),
            xs: vec![Vector::zeros(d); unknown],
            known_channels,
            t: 0,
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.xr.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gram(&self) -> &Matrix {
        &self.v
    }

    pub fn factor(&self) -> &SpdFactorization {
        &self.factor
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn num_unknown(&self) -> usize {
        self.xs.len()
    }

    /// `log det V`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Adds one observation.
    pub fn update(&mut self, x: &Vector, f: &Feedback) -> Result<()> {
        let expected = self.known_channels + self.xs.len();
        if f.safety.len() != expected {
            return Err(EstimationError::FeedbackShape { expected, found: f.safety.len() });
        }
        let v = numeric::rank_one_update(&self.v, x)?;
        let factor = numeric::spd_sqrt(&v)?;
        self.log_det = numeric::log_det(&v)?;
        self.v = v;
        self.factor = factor;
        self.xr = self.xr.axpy(f.reward, x);
        for (j, acc) in self.xs.iter_mut().enumerate() {
            *acc = acc.axpy(f.safety[self.known_channels + j], x);
        }
        self.t += 1;
        Ok(())
    }

    pub fn theta_hat(&self) -> Vector {
        numeric::solve_spd(&self.v, &self.xr).expect("gram matrix is SPD")
    }

    /// Estimate of the `j`-th unknown constraint vector (0-based among unknown ones).
    pub fn constraint_hat(&self, j: usize) -> Result<Vector> {
        let acc = self.xs.get(j).ok_or(EstimationError::NoSuchTarget { index: j, count: self.xs.len() })?;
        Ok(numeric::solve_spd(&self.v, acc)?)
    }

    pub fn estimate(&self, target: Target) -> Result<Vector> {
        match target {
            Target::Reward => Ok(self.theta_hat()),
            Target::Unknown(j) => self.constraint_hat(j),
        }
    }

    /// `||x||_{V^{-1}}`.
    pub fn inv_norm(&self, x: &Vector) -> Result<f64> {
        Ok(self.factor.inv_norm(x)?)
    }
}

/// Parameters of the confidence radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusParams {
    pub delta: f64,
    pub unknown: usize,
    /// Bound on the norms of the latent vectors.
    #[serde(default = "one")]
    pub s: f64,
    /// Sub-Gaussian scale of the noise.
    #[serde(default = "one")]
    pub r: f64,
}

fn one() -> f64 {
    1.0
}

impl RadiusParams {
    pub fn new(delta: f64, unknown: usize) -> Self {
        RadiusParams { delta, unknown, s: 1.0, r: 1.0 }
    }
}

/// `sqrt(beta)` for the current state:
/// `R sqrt(0.5 log((U + 1) det(V)^{1/2} det(lambda I)^{-1/2} / delta)) + S sqrt(lambda)`.
pub fn sqrt_beta(g: &GramState, p: &RadiusParams) -> f64 {
    let d = g.dim() as f64;
    let half_log_ratio = 0.5 * (g.log_det - d * g.lambda.ln());
    let inner = ((p.unknown as f64 + 1.0) / p.delta).ln() + half_log_ratio.max(0.0);
    p.r * (0.5 * inner).sqrt() + p.s * g.lambda.sqrt()
}

/// The squared radius `beta`.
pub fn beta(g: &GramState, p: &RadiusParams) -> f64 {
    sqrt_beta(g, p).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionGeometry {
    Ellipsoid,
    #[serde(rename = "linf")]
    BoxLinf,
    #[serde(rename = "l1")]
    BoxL1,
    /// A single known point.
    Known,
}

impl RegionGeometry {
    pub fn is_box(self) -> bool {
        matches!(self, RegionGeometry::BoxLinf | RegionGeometry::BoxL1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Reward,
    /// 0-based index among the unknown constraints.
    Unknown(usize),
}

/// A confidence region around an estimate, measured in the norm induced by `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceRegion {
    center: Vector,
    shape: Option<SpdFactorization>,
    radius: f64,
    geometry: RegionGeometry,
}

impl ConfidenceRegion {
    pub fn new(center: Vector, shape: &Matrix, radius: f64, geometry: RegionGeometry) -> Result<Self> {
        if geometry == RegionGeometry::Known {
            return Ok(Self::singleton(center));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(EstimationError::InvalidRegion("radius must be finite and nonnegative"));
        }
        let shape = numeric::spd_sqrt(shape)?;
        if shape.dim() != center.dim() {
            return Err(NumericError::DimensionMismatch { expected: center.dim(), found: shape.dim() }.into());
        }
        Ok(ConfidenceRegion { center, shape: Some(shape), radius, geometry })
    }

    fn from_factor(center: Vector, shape: SpdFactorization, radius: f64, geometry: RegionGeometry) -> Self {
        ConfidenceRegion { center, shape: Some(shape), radius, geometry }
    }

    /// The singleton `{point}`.
    pub fn singleton(point: Vector) -> Self {
        ConfidenceRegion { center: point, shape: None, radius: 0.0, geometry: RegionGeometry::Known }
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn geometry(&self) -> RegionGeometry {
        self.geometry
    }

    pub fn shape(&self) -> Option<&SpdFactorization> {
        self.shape.as_ref()
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.center.dim() {
            return Err(NumericError::DimensionMismatch { expected: self.center.dim(), found: x.dim() }.into());
        }
        Ok(())
    }

    /// `min <a, x>` over the region.
    pub fn support_min(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        let base = self.center.dot(x);
        let Some(shape) = &self.shape else { return Ok(base) };
        let w = shape.inv_sqrt().mul_vec(x)?;
        let dual = match self.geometry {
            RegionGeometry::Ellipsoid => w.norm(),
            RegionGeometry::BoxLinf => w.norm1(),
            RegionGeometry::BoxL1 => w.norm_inf(),
            RegionGeometry::Known => 0.0,
        };
        Ok(base - self.radius * dual)
    }

    /// `max <a, x>` over the region.
    pub fn support_max(&self, x: &Vector) -> Result<f64> {
        Ok(-self.support_min(&x.scaled(-1.0))?)
    }

    /// Extreme points of a box region (or the point of a singleton), in a fixed order:
    /// L1 gives `center + r V^{-1/2} e_0, center - r V^{-1/2} e_0, ...`; L-inf gives
    /// sign patterns in binary order with coordinate 0 the slowest.
    pub fn vertices(&self) -> Result<Vec<Vector>> {
        let d = self.center.dim();
        let Some(shape) = &self.shape else { return Ok(vec![self.center.clone()]) };
        let cols: Vec<Vector> = (0..d).map(|j| shape.inv_sqrt().column(j).scaled(self.radius)).collect();
        match self.geometry {
            RegionGeometry::BoxL1 => {
                let mut out = Vec::with_capacity(2 * d);
                for c in &cols {
                    out.push(self.center.add(c));
                    out.push(self.center.sub(c));
                }
                Ok(out)
            }
            RegionGeometry::BoxLinf => {
                if d > MAX_LINF_DIM {
                    return Err(EstimationError::TooManyVertices(d));
                }
                let mut out = Vec::with_capacity(1 << d);
                for pattern in 0..(1usize << d) {
                    let mut v = self.center.clone();
                    for (j, c) in cols.iter().enumerate() {
                        let negative = (pattern >> (d - 1 - j)) & 1 == 1;
                        v = v.axpy(if negative { -1.0 } else { 1.0 }, c);
                    }
                    out.push(v);
                }
                Ok(out)
            }
            g => Err(EstimationError::NoVertices(g)),
        }
    }

    /// Membership with tolerance 1e-9 on the defining norm.
    pub fn contains(&self, a: &Vector) -> Result<bool> {
        self.check(a)?;
        let diff = a.sub(&self.center);
        let Some(shape) = &self.shape else { return Ok(diff.norm() <= TOL.membership) };
        let z = shape.sqrt().mul_vec(&diff)?;
        let n = match self.geometry {
            RegionGeometry::Ellipsoid => z.norm(),
            RegionGeometry::BoxLinf => z.norm_inf(),
            RegionGeometry::BoxL1 => z.norm1(),
            RegionGeometry::Known => diff.norm(),
        };
        Ok(n <= self.radius + TOL.membership)
    }
}

/// Confidence region for `target` built from the current (pre-round) state.
pub fn region(g: &GramState, target: Target, geometry: RegionGeometry, p: &RadiusParams) -> Result<ConfidenceRegion> {
    let center = g.estimate(target)?;
    if geometry == RegionGeometry::Known {
        return Ok(ConfidenceRegion::singleton(center));
    }
    let sb = sqrt_beta(g, p);
    let radius = match geometry {
        RegionGeometry::BoxL1 => sb * (g.dim() as f64).sqrt(),
        _ => sb,
    };
    Ok(ConfidenceRegion::from_factor(center, g.factor.clone(), radius, geometry))
}

/// Regions for the reward and for every unknown constraint, in that order.
pub fn all_regions(g: &GramState, geometry: RegionGeometry, p: &RadiusParams) -> Result<(ConfidenceRegion, Vec<ConfidenceRegion>)> {
    let reward = region(g, Target::Reward, geometry, p)?;
    let cons = (0..g.num_unknown())
        .map(|j| region(g, Target::Unknown(j), geometry, p))
        .collect::<Result<Vec<_>>>()?;
    Ok((reward, cons))
}

/// Per-round error scale `2 sqrt(beta) ||x||_{V^{-1}}`, times `sqrt(d)` for box geometries.
pub fn rho(g: &GramState, x: &Vector, p: &RadiusParams, geometry: RegionGeometry) -> Result<f64> {
    let base = 2.0 * sqrt_beta(g, p) * g.inv_norm(x)?;
    Ok(if geometry.is_box() { base * (g.dim() as f64).sqrt() } else { base })
}
