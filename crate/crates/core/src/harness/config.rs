//! Experiment configuration and instance sources.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::environment::NoiseModel;
use crate::estimation::RegionGeometry;
use crate::instance::{self, ProblemInstance};
use crate::policy::PolicyKind;

/// Region shapes used for action selection and for per-round metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometrySetting {
    #[default]
    L1,
    Linf,
    /// Select with L1 boxes, measure association and error scale with ellipsoids.
    EllipsoidReference,
}

impl GeometrySetting {
    pub fn selection(self) -> RegionGeometry {
        match self {
            GeometrySetting::L1 | GeometrySetting::EllipsoidReference => RegionGeometry::BoxL1,
            GeometrySetting::Linf => RegionGeometry::BoxLinf,
        }
    }

    pub fn measurement(self) -> RegionGeometry {
        match self {
            GeometrySetting::L1 => RegionGeometry::BoxL1,
            GeometrySetting::Linf => RegionGeometry::BoxLinf,
            GeometrySetting::EllipsoidReference => RegionGeometry::Ellipsoid,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "l1" => Some(GeometrySetting::L1),
            "linf" => Some(GeometrySetting::Linf),
            "ellipsoid-reference" => Some(GeometrySetting::EllipsoidReference),
            _ => None,
        }
    }
}

/// Either `"auto"` (use the validation recommendation) or a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl AutoOr {
    pub fn auto() -> Self {
        AutoOr::Auto(AutoTag::Auto)
    }

    pub fn resolve(self, auto: f64) -> f64 {
        match self {
            AutoOr::Value(v) => v,
            AutoOr::Auto(_) => auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in name (`example1`, `example1-hard`, `simplex-mab`,
    /// `lower-bound:<d>:<eps>:<signs>`) or a path to an instance file.
    #[serde(default = "default_instance")]
    pub instance: String,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "AutoOr::auto")]
    pub lambda: AutoOr,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
    #[serde(default)]
    pub geometry: GeometrySetting,
    /// Norm bound used in the confidence radius; `auto` takes it from validation.
    #[serde(default = "AutoOr::auto")]
    pub s_bound: AutoOr,
    /// Sub-Gaussian scale used in the confidence radius.
    #[serde(default = "default_one")]
    pub r_scale: f64,
    #[serde(default = "default_one")]
    pub lts_inflation: f64,
    #[serde(default = "default_half")]
    pub lts_beta_exponent: f64,
    /// Replacement levels keyed by 1-based constraint index.
    #[serde(default)]
    pub alpha_overrides: BTreeMap<String, f64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Write the per-round CSV (can be large).
    #[serde(default = "default_true")]
    pub write_rounds: bool,
}

fn default_instance() -> String {
    "example1".into()
}
fn default_policies() -> Vec<PolicyKind> {
    vec![PolicyKind::Doslb]
}
fn default_horizon() -> usize {
    10_000
}
fn default_seeds() -> Vec<u64> {
    (1..=6).collect()
}
fn default_delta() -> f64 {
    0.01
}
fn default_eps() -> f64 {
    0.01
}
fn default_noise() -> NoiseModel {
    NoiseModel::gaussian(0.1f64.sqrt())
}
fn default_one() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.eps >= 0.0) {
            return bad(format!("eps must be nonnegative, got {}", self.eps));
        }
        if let AutoOr::Value(l) = self.lambda {
            if !(l > 0.0) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        for k in self.alpha_overrides.keys() {
            if k.parse::<usize>().map_or(true, |i| i == 0) {
                return bad(format!("alpha override key {k:?} is not a 1-based index"));
            }
        }
        Ok(())
    }

    /// Loads the instance and applies the level overrides.
    pub fn load_instance(&self) -> Result<ProblemInstance, HarnessError> {
        let mut p = load_instance_source(&self.instance)?;
        if !self.alpha_overrides.is_empty() {
            for (k, v) in &self.alpha_overrides {
                let i: usize = k.parse().expect("checked");
                let c = p
                    .constraints
                    .get_mut(i - 1)
                    .ok_or_else(|| HarnessError::Config(format!("alpha override for missing constraint {i}")))?;
                c.level = *v;
            }
            p.check()?;
        }
        Ok(p)
    }
}

fn parse_signs(s: &str, d: usize) -> Result<Vec<f64>, HarnessError> {
    let signs: Vec<f64> = s
        .chars()
        .map(|c| match c {
            '+' => Ok(1.0),
            '-' => Ok(-1.0),
            _ => Err(HarnessError::Config(format!("sign pattern {s:?} must use only + and -"))),
        })
        .collect::<Result<_, _>>()?;
    if signs.len() != d {
        return Err(HarnessError::Config(format!("sign pattern {s:?} must have {d} entries")));
    }
    Ok(signs)
}

/// Resolves a built-in instance name or reads an instance file.
pub fn load_instance_source(source: &str) -> Result<ProblemInstance, HarnessError> {
    match source {
        "example1" => return Ok(instance::running_example()),
        "example1-hard" => return Ok(instance::running_example_with_level(0.1)),
        "simplex-mab" => {
            return Ok(instance::simplex_mab_instance(&[0.5, 3f64.sqrt() / 4.0, 0.75], &[0.0, 0.0, 1.0], 0.5)?)
        }
        _ => {}
    }
    if let Some(rest) = source.strip_prefix("lower-bound:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(HarnessError::Config("expected lower-bound:<d>:<eps>:<signs>".into()));
        }
        let d: usize = parts[0].parse().map_err(|_| HarnessError::Config(format!("bad dimension {:?}", parts[0])))?;
        let eps: f64 = parts[1].parse().map_err(|_| HarnessError::Config(format!("bad eps {:?}", parts[1])))?;
        return Ok(instance::lower_bound_instance(d, eps, &parse_signs(parts[2], d)?)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(HarnessError::Config(format!("{source:?} is neither a built-in instance nor an existing file")));
    }
    Ok(ProblemInstance::load(path)?)
}
