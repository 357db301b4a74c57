//! The stochastic environment: noisy reward and safety feedback for a played
//! action, driven by a seekable counter-based generator.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ProblemInstance, Visibility};
use crate::numeric::Vector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("action has dimension {found}, instance has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Bernoulli channel {channel} has mean {mean} outside [0, 1]")]
    BernoulliMeanOutOfRange { channel: usize, mean: f64 },
    #[error("point is not on the probability simplex")]
    NotOnSimplex,
}

/// Random stream identified by `(seed, stream, counter)`; equal triples give
/// equal continuations. `counter` counts 64-bit words drawn so far.
#[derive(Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream for the same seed (e.g. one for the policy, one for the environment).
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self::at(seed, stream, 0)
    }

    /// Restores the state after `counter` words have been drawn.
    pub fn at(seed: u64, stream: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(counter) * 2);
        RngState { seed, stream, counter, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller (cosine branch only, two uniforms per draw).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vector(&mut self, d: usize) -> Vector {
        Vector((0..d).map(|_| self.standard_normal()).collect())
    }
}

impl std::fmt::Debug for RngState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RngState")
            .field("seed", &self.seed)
            .field("stream", &self.stream)
            .field("counter", &self.counter)
            .finish()
    }
}

impl PartialEq for RngState {
    fn eq(&self, other: &Self) -> bool {
        (self.seed, self.stream, self.counter) == (other.seed, other.stream, other.counter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseKind {
    None,
    Gaussian { sigma: f64 },
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(flatten)]
    pub kind: NoiseKind,
    /// Independent draws per channel; when false all channels share one draw.
    #[serde(default = "default_true")]
    pub independent: bool,
}

fn default_true() -> bool {
    true
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel { kind: NoiseKind::None, independent: true }
    }

    pub fn gaussian(sigma: f64) -> Self {
        NoiseModel { kind: NoiseKind::Gaussian { sigma }, independent: true }
    }

    pub fn bernoulli() -> Self {
        NoiseModel { kind: NoiseKind::Bernoulli, independent: true }
    }

    pub fn shared(mut self) -> Self {
        self.independent = false;
        self
    }
}

/// One round of feedback: the reward and one safety signal per constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub reward: f64,
    pub safety: Vec<f64>,
}

/// Draws feedback for action `x`.
///
/// Gaussian noise perturbs every channel. Bernoulli noise makes the reward and
/// the unknown-constraint channels `{0, 1}`-valued with the true means; known
/// channels carry no information and are returned exactly.
pub fn step(p: &ProblemInstance, x: &Vector, noise: &NoiseModel, rng: &mut RngState) -> Result<Feedback, EnvError> {
    if x.dim() != p.d {
        return Err(EnvError::DimensionMismatch { expected: p.d, found: x.dim() });
    }
    let reward_mean = p.theta_star.dot(x);
    let means: Vec<f64> = p.constraints.iter().map(|c| c.vector.dot(x)).collect();
    match noise.kind {
        NoiseKind::None => Ok(Feedback { reward: reward_mean, safety: means }),
        NoiseKind::Gaussian { sigma } => {
            let channels = means.len() + 1;
            let draws: Vec<f64> = if noise.independent {
                (0..channels).map(|_| rng.standard_normal()).collect()
            } else {
                vec![rng.standard_normal(); channels]
            };
            Ok(Feedback {
                reward: reward_mean + sigma * draws[0],
                safety: means.iter().zip(&draws[1..]).map(|(m, g)| m + sigma * g).collect(),
            })
        }
        NoiseKind::Bernoulli => {
            let noisy: Vec<usize> = std::iter::once(0)
                .chain(
                    p.constraints
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.visibility == Visibility::Unknown)
                        .map(|(i, _)| i + 1),
                )
                .collect();
            let all_means: Vec<f64> = std::iter::once(reward_mean).chain(means.iter().cloned()).collect();
            for &ch in &noisy {
                let m = all_means[ch];
                if !(-1e-12..=1.0 + 1e-12).contains(&m) {
                    return Err(EnvError::BernoulliMeanOutOfRange { channel: ch, mean: m });
                }
            }
            let mut out = all_means.clone();
            let shared = if noise.independent { None } else { Some(rng.uniform()) };
            for &ch in &noisy {
                let u = shared.unwrap_or_else(|| rng.uniform());
                out[ch] = if u < all_means[ch] { 1.0 } else { 0.0 };
            }
            Ok(Feedback { reward: out[0], safety: out[1..].to_vec() })
        }
    }
}

/// A latent instance bundled with its noise model and random stream.
#[derive(Debug, Clone)]
pub struct Environment {
    pub instance: ProblemInstance,
    pub noise: NoiseModel,
    pub rng: RngState,
}

impl Environment {
    pub fn new(instance: ProblemInstance, noise: NoiseModel, rng: RngState) -> Self {
        Environment { instance, noise, rng }
    }

    pub fn step(&mut self, x: &Vector) -> Result<Feedback, EnvError> {
        step(&self.instance, x, &self.noise, &mut self.rng)
    }
}

/// Samples an arm index with probability equal to its coordinate of `x`.
pub fn sample_arm(x: &Vector, rng: &mut RngState) -> Result<usize, EnvError> {
    let total: f64 = x.iter().sum();
    if x.iter().any(|&v| v < -1e-12 || !v.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(EnvError::NotOnSimplex);
    }
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let mass: f64 = clipped.iter().sum();
    let u = rng.uniform() * mass;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &w) in clipped.iter().enumerate() {
        if w > 0.0 {
            last = k;
        }
        acc += w;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{running_example, simplex_mab_instance};

    #[test]
    fn noiseless_feedback_is_exact() {
        let p = running_example();
        let mut rng = RngState::new(1);
        let f = step(&p, &Vector::from([2.9, 1.1]), &NoiseModel::none(), &mut rng).unwrap();
        assert_eq!(f.reward, 0.1 * 2.9 + 1.1);
        assert_eq!(f.safety[3], 0.55);
        assert_eq!(f.safety.len(), 4);
    }

    #[test]
    fn zero_sigma_matches_noiseless() {
        let p = running_example();
        let x = Vector::from([1.0, 0.5]);
        let a = step(&p, &x, &NoiseModel::gaussian(0.0), &mut RngState::new(5)).unwrap();
        let b = step(&p, &x, &NoiseModel::none(), &mut RngState::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bernoulli_rewards_are_binary() {
        let p = simplex_mab_instance(&[0.5, 0.25, 0.75], &[0.0, 0.0, 1.0], 0.5).unwrap();
        let mut rng = RngState::new(9);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let f = step(&p, &Vector::basis(3, 1), &NoiseModel::bernoulli(), &mut rng).unwrap();
            assert!(f.reward == 0.0 || f.reward == 1.0);
            sum += f.reward;
        }
        assert!((sum / n as f64 - 0.25).abs() < 0.015);
        let bad = running_example();
        assert!(matches!(
            step(&bad, &Vector::from([2.0, 2.0]), &NoiseModel::bernoulli(), &mut rng),
            Err(EnvError::BernoulliMeanOutOfRange { .. })
        ));
    }

    #[test]
    fn streams_are_seekable() {
        let mut a = RngState::with_stream(3, 1);
        let head: Vec<u64> = (0..5).map(|_| a.next_u64()).collect();
        let mut b = RngState::at(3, 1, 2);
        assert_eq!(b.next_u64(), head[2]);
        assert_ne!(RngState::with_stream(3, 0).next_u64(), head[0]);
    }

    #[test]
    fn arm_sampling() {
        let mut rng = RngState::new(11);
        for _ in 0..100 {
            assert_eq!(sample_arm(&Vector::basis(3, 1), &mut rng).unwrap(), 1);
        }
        assert_eq!(sample_arm(&Vector::from([0.5, 0.6]), &mut rng), Err(EnvError::NotOnSimplex));
        assert_eq!(sample_arm(&Vector::from([-0.1, 1.1]), &mut rng), Err(EnvError::NotOnSimplex));
    }
}
