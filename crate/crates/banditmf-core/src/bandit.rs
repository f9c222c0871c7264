//! Context-free multi-armed bandit policies (epsilon-greedy, UCB1,
//! Thompson sampling) plus session traces and regret accounting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float as _;

/// Error raised by bandit policies and regret computation.
#[derive(Debug, Clone, PartialEq)]
pub enum BanditError {
    InvalidParams(&'static str),
    ArmOutOfRange { arm: usize, num_arms: usize },
    /// Rewards must lie in `[0, 1]`.
    RewardOutOfRange { reward: f64 },
    /// Ratings must lie in `[0, rating_max]` with a positive maximum.
    RatingOutOfRange { rating: f64, rating_max: f64 },
    /// A per-round expected reward exceeded the supplied optimum.
    InconsistentOracle { round: usize },
}

impl fmt::Display for BanditError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BanditError::InvalidParams(msg) => write!(f, "invalid bandit params: {msg}"),
            BanditError::ArmOutOfRange { arm, num_arms } => {
                write!(f, "arm {arm} out of range for {num_arms} arms")
            }
            BanditError::RewardOutOfRange { reward } => {
                write!(f, "reward {reward} outside [0, 1]")
            }
            BanditError::RatingOutOfRange { rating, rating_max } => {
                write!(f, "rating {rating} outside [0, {rating_max}]")
            }
            BanditError::InconsistentOracle { round } => {
                write!(f, "round {round}: expected reward exceeds the oracle optimum")
            }
        }
    }
}

impl core::error::Error for BanditError {}

/// Which selection rule a [`PolicyState`] follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Explore a uniform arm with probability `epsilon`, otherwise exploit
    /// the best observed mean.
    EpsilonGreedy { epsilon: f64 },
    /// Pull every arm once, then maximize `mean + exploration *
    /// sqrt(2 ln t / pulls)`.
    Ucb1 { exploration: f64 },
    /// Sample a Beta posterior per arm and pick the largest draw.
    ThompsonSampling,
}

/// Sufficient statistics of a context-free policy over a fixed arm set.
///
/// All arms start with zero pulls, mean reward 0 and a `Beta(1, 1)` prior.
/// Ties in any argmax resolve to the lowest arm index.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    algorithm: Algorithm,
    pull_counts: Vec<u64>,
    mean_rewards: Vec<f64>,
    /// Beta posterior parameters, updated fractionally: a gain of `r` adds
    /// `r` to alpha and `1 - r` to beta.
    beta_params: Vec<(f64, f64)>,
}

impl PolicyState {
    pub fn new(algorithm: Algorithm, num_arms: usize) -> Result<Self, BanditError> {
        if num_arms == 0 {
            return Err(BanditError::InvalidParams("need at least one arm"));
        }
        match algorithm {
            Algorithm::EpsilonGreedy { epsilon } => {
                if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
                    return Err(BanditError::InvalidParams("epsilon must lie in [0, 1]"));
                }
            }
            Algorithm::Ucb1 { exploration } => {
                if !(exploration.is_finite() && exploration >= 0.0) {
                    return Err(BanditError::InvalidParams(
                        "exploration weight must be non-negative",
                    ));
                }
            }
            Algorithm::ThompsonSampling => {}
        }
        Ok(Self {
            algorithm,
            pull_counts: vec![0; num_arms],
            mean_rewards: vec![0.0; num_arms],
            beta_params: vec![(1.0, 1.0); num_arms],
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn num_arms(&self) -> usize {
        self.pull_counts.len()
    }

    pub fn pull_count(&self, arm: usize) -> u64 {
        self.pull_counts[arm]
    }

    pub fn mean_reward(&self, arm: usize) -> f64 {
        self.mean_rewards[arm]
    }

    /// `(alpha, beta)` of the arm's Beta posterior.
    pub fn beta_params(&self, arm: usize) -> (f64, f64) {
        self.beta_params[arm]
    }

    /// Picks an arm for round `t` (1-based). Only epsilon-greedy and
    /// Thompson sampling consume randomness.
    ///
    /// # Panics
    /// Panics if `t` is 0.
    pub fn select_arm(&self, t: u64, rng: &mut ChaCha8Rng) -> usize {
        assert!(t >= 1, "rounds are 1-based");
        match self.algorithm {
            Algorithm::EpsilonGreedy { epsilon } => {
                let coin: f64 = rng.random();
                if coin < epsilon {
                    rng.random_range(0..self.num_arms())
                } else {
                    argmax(&self.mean_rewards)
                }
            }
            Algorithm::Ucb1 { exploration } => {
                if let Some(unpulled) = self.pull_counts.iter().position(|&n| n == 0) {
                    return unpulled;
                }
                let ln_t = (t as f64).ln();
                let scores: Vec<f64> = self
                    .mean_rewards
                    .iter()
                    .zip(&self.pull_counts)
                    .map(|(&mean, &n)| mean + exploration * (2.0 * ln_t / n as f64).sqrt())
                    .collect();
                argmax(&scores)
            }
            Algorithm::ThompsonSampling => {
                let draws: Vec<f64> = self
                    .beta_params
                    .iter()
                    .map(|&(alpha, beta)| {
                        Beta::new(alpha, beta)
                            .expect("posterior parameters stay positive")
                            .sample(rng)
                    })
                    .collect();
                argmax(&draws)
            }
        }
    }

    /// Records a reward in `[0, 1]` for one pull of `arm`.
    pub fn update(&mut self, arm: usize, reward: f64) -> Result<(), BanditError> {
        if arm >= self.num_arms() {
            return Err(BanditError::ArmOutOfRange { arm, num_arms: self.num_arms() });
        }
        if !(reward.is_finite() && (0.0..=1.0).contains(&reward)) {
            return Err(BanditError::RewardOutOfRange { reward });
        }
        self.pull_counts[arm] += 1;
        let n = self.pull_counts[arm] as f64;
        self.mean_rewards[arm] += (reward - self.mean_rewards[arm]) / n;
        self.beta_params[arm].0 += reward;
        self.beta_params[arm].1 += 1.0 - reward;
        Ok(())
    }
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Maps a rating on `[0, rating_max]` to a reward on `[0, 1]`.
pub fn normalize_reward(rating: f64, rating_max: f64) -> Result<f64, BanditError> {
    if !(rating_max.is_finite() && rating_max > 0.0)
        || !(rating.is_finite() && rating >= 0.0 && rating <= rating_max)
    {
        return Err(BanditError::RatingOutOfRange { rating, rating_max });
    }
    Ok(rating / rating_max)
}

/// One recommendation round inside a session.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// Chosen arm (cluster model).
    pub arm: usize,
    /// Item recommended by that arm.
    pub item: usize,
    /// Realized normalized reward.
    pub reward: f64,
    /// Expected per-round reward of the chosen arm.
    pub expected_reward: f64,
    /// `mu_star - expected_reward` for this round.
    pub regret: f64,
}

/// Per-round records plus running prefix sums of reward and regret.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionTrace {
    pub rounds: Vec<RoundRecord>,
    pub cumulative_reward: Vec<f64>,
    pub cumulative_regret: Vec<f64>,
}

impl SessionTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Appends a round, extending both prefix-sum series.
    pub fn push(&mut self, record: RoundRecord) {
        let reward_so_far = self.cumulative_reward.last().copied().unwrap_or(0.0);
        let regret_so_far = self.cumulative_regret.last().copied().unwrap_or(0.0);
        self.cumulative_reward.push(reward_so_far + record.reward);
        self.cumulative_regret.push(regret_so_far + record.regret);
        self.rounds.push(record);
    }

    /// Realized rewards in round order.
    pub fn rewards(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.reward).collect()
    }
}

/// Cumulative regret series against an oracle mean `mu_star`, computed
/// from the trace's expected per-round rewards.
///
/// Fails if any round's expected reward exceeds `mu_star` (that would mean
/// the "optimum" was not actually optimal).
pub fn regret_series(trace: &SessionTrace, mu_star: f64) -> Result<Vec<f64>, BanditError> {
    let mut out = Vec::with_capacity(trace.len());
    let mut total = 0.0;
    for record in &trace.rounds {
        if record.expected_reward > mu_star {
            return Err(BanditError::InconsistentOracle { round: record.round });
        }
        total += mu_star - record.expected_reward;
        out.push(total);
    }
    Ok(out)
}
