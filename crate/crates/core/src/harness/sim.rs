//! The simulation loop and multi-seed orchestration.

use rayon::prelude::*;

use super::config::{ExperimentConfig, GeometrySetting};
use super::Result;
use crate::environment::{self, NoiseModel, RngState};
use crate::estimation::{GramState, RadiusParams};
use crate::gaps::{self, Bis, GapReport};
use crate::instance::{self, ProblemInstance};
use crate::metrics::{self, BoundParams, RecordContext, RoundRecord, RunSummary};
use crate::policy::{self, PolicyConfig, PolicyKind};

/// RNG stream feeding the environment noise.
pub const ENV_STREAM: u64 = 1;
/// RNG stream feeding policy randomization.
pub const POLICY_STREAM: u64 = 2;

/// Everything a run needs besides the policy kind and the seed.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub instance: ProblemInstance,
    pub lambda: f64,
    pub radius: RadiusParams,
    pub noise: NoiseModel,
    pub geometry: GeometrySetting,
    pub eps: f64,
    pub horizon: usize,
    pub lts_inflation: f64,
    pub lts_beta_exponent: f64,
    /// `None` when the instance has no positive gap or is too large to analyze.
    pub gaps: Option<GapReport>,
    pub optimal_bises: Vec<Bis>,
}

impl RunSetup {
    /// Resolves `auto` settings from the instance's validation report and
    /// runs the gap analysis once.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let instance = cfg.load_instance()?;
        let report = instance::validate(&instance)?;
        let lambda = cfg.lambda.resolve(report.suggested_lambda);
        let mut radius = RadiusParams::new(cfg.delta, instance.num_unknown());
        radius.s = cfg.s_bound.resolve(report.parameter_bound.max(1.0));
        radius.r = cfg.r_scale;
        let gaps = gaps::xi(&instance).ok();
        let optimal_bises = match &gaps {
            Some(g) => g.optimal_bises(),
            None => optimal_bises_of(&instance)?,
        };
        Ok(RunSetup {
            instance,
            lambda,
            radius,
            noise: cfg.noise,
            geometry: cfg.geometry,
            eps: cfg.eps,
            horizon: cfg.horizon,
            lts_inflation: cfg.lts_inflation,
            lts_beta_exponent: cfg.lts_beta_exponent,
            gaps,
            optimal_bises,
        })
    }

    pub fn xi(&self) -> Option<f64> {
        self.gaps.as_ref().map(|g| g.xi)
    }

    pub fn policy_config(&self, kind: PolicyKind) -> PolicyConfig {
        let mut cfg = PolicyConfig::new(kind, self.radius);
        cfg.geometry = self.geometry.selection();
        cfg.lts_inflation = self.lts_inflation;
        cfg.lts_beta_exponent = self.lts_beta_exponent;
        cfg
    }

    pub fn bound_params(&self) -> BoundParams {
        BoundParams {
            d: self.instance.d,
            lambda: self.lambda,
            delta: self.radius.delta,
            unknown: self.instance.num_unknown(),
            xi: self.xi(),
        }
    }
}

/// Optimal BISs without the full gap analysis: every BIS whose associated
/// point is the optimum.
fn optimal_bises_of(p: &ProblemInstance) -> Result<Vec<Bis>> {
    let mut out = Vec::new();
    for idx in instance::combinations(p.num_constraints(), p.d) {
        let bis = Bis::new(idx);
        if gaps::classify(p, &bis)?.optimal {
            out.push(bis);
        }
    }
    Ok(out)
}

/// One finished trajectory.
#[derive(Debug, Clone)]
pub struct Run {
    pub policy: PolicyKind,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub summary: RunSummary,
}

impl Run {
    pub fn id(&self) -> String {
        format!("{}-{}", self.policy.name(), self.seed)
    }
}

/// Plays `setup.horizon` rounds of `kind` with the given seed.
///
/// Each round selects from the state built on earlier rounds only, then draws
/// feedback, records, and finally updates the state.
pub fn simulate(setup: &RunSetup, kind: PolicyKind, seed: u64) -> Result<Run> {
    let p = &setup.instance;
    let view = p.public_view();
    let cfg = setup.policy_config(kind);
    let ctx = RecordContext::new(p, setup.optimal_bises.clone(), setup.radius, setup.geometry.measurement())?;
    let mut g = GramState::new(p.d, setup.lambda, p.num_known(), p.num_unknown())?;
    let mut env_rng = RngState::with_stream(seed, ENV_STREAM);
    let mut policy_rng = RngState::with_stream(seed, POLICY_STREAM);
    let oracle = match kind {
        PolicyKind::Oracle => Some(policy::oracle_select(p)?),
        _ => None,
    };
    let mut records = Vec::with_capacity(setup.horizon);
    for t in 1..=setup.horizon {
        let decision = match kind {
            PolicyKind::Doslb => policy::doslb_select(&view, &g, &cfg)?,
            PolicyKind::SafeLts => policy::safelts_select(&view, &g, &cfg, &mut policy_rng)?,
            PolicyKind::Oracle => oracle.clone().expect("computed above"),
        };
        let feedback = environment::step(p, &decision.x, &setup.noise, &mut env_rng)?;
        records.push(metrics::record_round(&ctx, t, &decision, feedback.reward, &g)?);
        g.update(&decision.x, &feedback)?;
    }
    let summary = metrics::summarize(&records, setup.eps).with_bounds(&setup.bound_params());
    Ok(Run { policy: kind, seed, records, summary })
}

/// Runs every (policy, seed) pair in parallel; results come back ordered by
/// policy, then by seed.
pub fn run_all(setup: &RunSetup, policies: &[PolicyKind], seeds: &[u64]) -> Result<Vec<Run>> {
    let jobs: Vec<(PolicyKind, u64)> = policies.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    jobs.par_iter().map(|&(k, s)| simulate(setup, k, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(horizon: usize) -> RunSetup {
        let cfg = ExperimentConfig { horizon, ..ExperimentConfig::default() };
        RunSetup::from_config(&cfg).unwrap()
    }

    #[test]
    fn auto_settings_follow_validation() {
        let s = setup(5);
        assert_eq!(s.lambda, 16.0);
        assert!(s.radius.s > 1.0 && s.radius.s < 1.01);
        assert_eq!(s.optimal_bises, vec![Bis::one_based(&[3, 4])]);
    }

    #[test]
    fn oracle_has_zero_regret() {
        let mut s = setup(10);
        s.noise = NoiseModel::none();
        let run = simulate(&s, PolicyKind::Oracle, 0).unwrap();
        assert_eq!(run.records.len(), 10);
        assert!(run.summary.regret.iter().all(|r| r.abs() < 1e-9));
        assert!(run.records.iter().all(|r| r.optimally_associated));
    }

    #[test]
    fn runs_are_reproducible_and_ordered() {
        let s = setup(15);
        let a = run_all(&s, &[PolicyKind::Doslb, PolicyKind::SafeLts], &[4, 2]).unwrap();
        let b = run_all(&s, &[PolicyKind::Doslb, PolicyKind::SafeLts], &[4, 2]).unwrap();
        let ids: Vec<String> = a.iter().map(Run::id).collect();
        assert_eq!(ids, ["doslb-4", "doslb-2", "safelts-4", "safelts-2"]);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.records, y.records);
        }
    }
}
