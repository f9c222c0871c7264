//! Contextual bandit with one ridge-regression model per arm, plus an
//! offline replay evaluator for logged interaction data.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Cholesky;
use crate::replay_log::ReplayLog;

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float as _;

/// Error raised by the contextual bandit.
#[derive(Debug, Clone, PartialEq)]
pub enum LinUcbError {
    InvalidParams(&'static str),
    ContextWidthMismatch { expected: usize, got: usize },
    ArmOutOfRange { arm: usize, num_arms: usize },
    NonFiniteReward { reward: f64 },
    /// A per-arm design matrix stopped being positive definite; indicates
    /// non-finite contexts were fed in.
    NumericalFailure,
}

impl fmt::Display for LinUcbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinUcbError::InvalidParams(msg) => write!(f, "invalid params: {msg}"),
            LinUcbError::ContextWidthMismatch { expected, got } => {
                write!(f, "context has {got} features, model expects {expected}")
            }
            LinUcbError::ArmOutOfRange { arm, num_arms } => {
                write!(f, "arm {arm} out of range for {num_arms} arms")
            }
            LinUcbError::NonFiniteReward { reward } => write!(f, "non-finite reward {reward}"),
            LinUcbError::NumericalFailure => {
                write!(f, "design matrix lost positive definiteness")
            }
        }
    }
}

impl core::error::Error for LinUcbError {}

/// How the width of the confidence bonus evolves over rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    /// Fixed width for every round.
    Constant(f64),
    /// `1 / sqrt(t)` with 1-based round `t`.
    InverseSqrtT,
    /// `numerator / (scale * correct)`, where `correct` counts correct
    /// predictions so far; before the first one the divisor is clamped so
    /// the width starts at `numerator / scale`.
    AdaptiveCorrect { numerator: f64, scale: f64 },
}

impl AlphaSchedule {
    /// Bonus width for 1-based round `t` after `correct` correct predictions.
    pub fn value(&self, t: u64, correct: u64) -> f64 {
        assert!(t >= 1, "rounds are 1-based");
        match *self {
            AlphaSchedule::Constant(c) => c,
            AlphaSchedule::InverseSqrtT => 1.0 / (t as f64).sqrt(),
            AlphaSchedule::AdaptiveCorrect { numerator, scale } => {
                numerator / (scale * correct.max(1) as f64)
            }
        }
    }

    /// Checks the schedule's parameters without building a policy.
    pub fn validate(&self) -> Result<(), LinUcbError> {
        match *self {
            AlphaSchedule::Constant(c) if !(c.is_finite() && c >= 0.0) => {
                Err(LinUcbError::InvalidParams("constant width must be non-negative"))
            }
            AlphaSchedule::AdaptiveCorrect { numerator, scale }
                if !(numerator.is_finite() && numerator > 0.0)
                    || !(scale.is_finite() && scale > 0.0) =>
            {
                Err(LinUcbError::InvalidParams("adaptive width needs positive parts"))
            }
            _ => Ok(()),
        }
    }
}

/// One ridge model: design matrix `A` (started at identity), response
/// vector `b`, and a cached factorization of `A`.
#[derive(Debug, Clone, PartialEq)]
struct ArmModel {
    a_matrix: Vec<f64>,
    b_vec: Vec<f64>,
    chol: Cholesky,
    theta: Vec<f64>,
    dirty: bool,
}

impl ArmModel {
    fn fresh(dim: usize) -> Self {
        let mut a_matrix = vec![0.0; dim * dim];
        for d in 0..dim {
            a_matrix[d * dim + d] = 1.0;
        }
        let chol = Cholesky::factor(&a_matrix, dim).expect("identity is positive definite");
        Self { a_matrix, b_vec: vec![0.0; dim], chol, theta: vec![0.0; dim], dirty: false }
    }

    fn refresh(&mut self, dim: usize) -> Result<(), LinUcbError> {
        if self.dirty {
            self.chol = Cholesky::factor(&self.a_matrix, dim)
                .map_err(|_| LinUcbError::NumericalFailure)?;
            self.theta = self.chol.solve(&self.b_vec);
            self.dirty = false;
        }
        Ok(())
    }
}

/// Disjoint-model contextual bandit: each arm owns an independent linear
/// estimate of reward given the shared context vector.
///
/// Scoring an arm with fresh statistics costs one cached triangular solve;
/// the factorization is redone lazily after updates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinUcbState {
    dim: usize,
    alpha: AlphaSchedule,
    arms: Vec<ArmModel>,
    correct: u64,
}

impl LinUcbState {
    pub fn new(num_arms: usize, dim: usize, alpha: AlphaSchedule) -> Result<Self, LinUcbError> {
        if num_arms == 0 {
            return Err(LinUcbError::InvalidParams("need at least one arm"));
        }
        if dim == 0 {
            return Err(LinUcbError::InvalidParams("need at least one feature"));
        }
        alpha.validate()?;
        Ok(Self {
            dim,
            alpha,
            arms: (0..num_arms).map(|_| ArmModel::fresh(dim)).collect(),
            correct: 0,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> AlphaSchedule {
        self.alpha
    }

    /// Correct predictions recorded so far (drives the adaptive schedule).
    pub fn correct_count(&self) -> u64 {
        self.correct
    }

    pub fn record_correct(&mut self) {
        self.correct += 1;
    }

    /// Current coefficient estimate for one arm.
    pub fn theta(&mut self, arm: usize) -> Result<&[f64], LinUcbError> {
        if arm >= self.arms.len() {
            return Err(LinUcbError::ArmOutOfRange { arm, num_arms: self.arms.len() });
        }
        self.arms[arm].refresh(self.dim)?;
        Ok(&self.arms[arm].theta)
    }

    fn check_context(&self, context: &[f64]) -> Result<(), LinUcbError> {
        if context.len() != self.dim {
            return Err(LinUcbError::ContextWidthMismatch {
                expected: self.dim,
                got: context.len(),
            });
        }
        Ok(())
    }

    /// Scores every arm on the shared context for 1-based round `t` and
    /// returns the winner (ties to the lowest index) together with all
    /// upper-confidence scores.
    ///
    /// Each score is `theta . x + alpha_t * sqrt(x' A^-1 x)`.
    pub fn select(&mut self, context: &[f64], t: u64) -> Result<(usize, Vec<f64>), LinUcbError> {
        self.check_context(context)?;
        let width = self.alpha.value(t, self.correct);
        let mut scores = Vec::with_capacity(self.arms.len());
        for arm in &mut self.arms {
            arm.refresh(self.dim)?;
            let estimate: f64 = arm.theta.iter().zip(context).map(|(&w, &x)| w * x).sum();
            let spread = arm.chol.quad_form(context).max(0.0).sqrt();
            scores.push(estimate + width * spread);
        }
        let mut best = 0;
        for (i, &score) in scores.iter().enumerate().skip(1) {
            if score > scores[best] {
                best = i;
            }
        }
        Ok((best, scores))
    }

    /// Folds one observation into the chosen arm's model:
    /// `A += x x'`, `b += reward * x`.
    pub fn update(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<(), LinUcbError> {
        self.check_context(context)?;
        if arm >= self.arms.len() {
            return Err(LinUcbError::ArmOutOfRange { arm, num_arms: self.arms.len() });
        }
        if !reward.is_finite() {
            return Err(LinUcbError::NonFiniteReward { reward });
        }
        let dim = self.dim;
        let model = &mut self.arms[arm];
        for r in 0..dim {
            for c in 0..dim {
                model.a_matrix[r * dim + c] += context[r] * context[c];
            }
        }
        for (slot, &x) in model.b_vec.iter_mut().zip(context) {
            *slot += reward * x;
        }
        model.dirty = true;
        Ok(())
    }
}

/// A policy that can be evaluated offline against logged interactions.
///
/// Both methods treat malformed inputs (wrong context width, out-of-range
/// arm) as programming errors and may panic; the replay log is validated
/// at load time.
pub trait ReplayPolicy {
    /// Picks an arm for the given context. `t` is 1-based and counts only
    /// retained (matched) events, so it reflects the policy's experience.
    fn choose(&mut self, context: &[f64], t: u64, rng: &mut ChaCha8Rng) -> usize;

    /// Feeds back the logged reward for a retained event.
    fn learn(&mut self, arm: usize, context: &[f64], reward: f64);
}

impl ReplayPolicy for LinUcbState {
    fn choose(&mut self, context: &[f64], t: u64, _rng: &mut ChaCha8Rng) -> usize {
        self.select(context, t).expect("replay context matches the model").0
    }

    fn learn(&mut self, arm: usize, context: &[f64], reward: f64) {
        self.update(arm, context, reward).expect("replay feedback matches the model");
        if reward == 1.0 {
            self.record_correct();
        }
    }
}

/// Uniform-random baseline that never learns.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    num_arms: usize,
}

impl RandomPolicy {
    /// # Panics
    /// Panics if `num_arms` is 0.
    pub fn new(num_arms: usize) -> Self {
        assert!(num_arms >= 1, "need at least one arm");
        Self { num_arms }
    }
}

impl ReplayPolicy for RandomPolicy {
    fn choose(&mut self, _context: &[f64], _t: u64, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(0..self.num_arms)
    }

    fn learn(&mut self, _arm: usize, _context: &[f64], _reward: f64) {}
}

/// Replays a log of uniformly-logged interactions through `policy`.
///
/// Each row is offered to the policy; only rows where the policy's pick
/// equals the logged action are retained. Retained rows feed `learn` and
/// count toward click-through: the returned series holds, after every log
/// row, `correct / matches` so far (NaN until the first match). Also
/// returns the final match and correct-prediction counts.
pub fn replay_ctr(
    log: &ReplayLog,
    policy: &mut dyn ReplayPolicy,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, u64, u64) {
    let mut series = Vec::with_capacity(log.len());
    let mut matches = 0u64;
    let mut correct = 0u64;
    for row in 0..log.len() {
        let context = log.context(row);
        let pick = policy.choose(context, matches + 1, rng);
        if pick == log.action(row) {
            let reward = log.reward(row);
            policy.learn(pick, context, reward);
            matches += 1;
            if reward == 1.0 {
                correct += 1;
            }
        }
        series.push(if matches == 0 { f64::NAN } else { correct as f64 / matches as f64 });
    }
    (series, matches, correct)
}
