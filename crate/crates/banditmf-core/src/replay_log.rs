//! Logged interaction data for offline (replay) policy evaluation.

use alloc::vec::Vec;
use core::fmt;

/// Error raised while building a [`ReplayLog`].
#[derive(Debug, Clone, PartialEq)]
pub enum ReplayLogError {
    /// A reward was neither 0 nor 1.
    NonBinaryReward { row: usize, reward: f64 },
    /// A context vector's length differed from the log's dimension.
    ContextWidthMismatch { row: usize, expected: usize, got: usize },
}

impl fmt::Display for ReplayLogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayLogError::NonBinaryReward { row, reward } => {
                write!(f, "row {row}: reward {reward} is not binary")
            }
            ReplayLogError::ContextWidthMismatch { row, expected, got } => {
                write!(f, "row {row}: context has {got} features, expected {expected}")
            }
        }
    }
}

impl core::error::Error for ReplayLogError {}

/// A sequence of `(logged_action, binary_reward, context)` rows recorded by
/// some historical policy, replayed to evaluate a new policy offline.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayLog {
    dim: usize,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    contexts: Vec<f64>,
}

impl ReplayLog {
    /// Builds a log from parallel rows. The context dimension is fixed by
    /// the first row; rewards must be exactly 0 or 1.
    pub fn from_rows(rows: Vec<(usize, f64, Vec<f64>)>) -> Result<Self, ReplayLogError> {
        let dim = rows.first().map_or(0, |r| r.2.len());
        let mut actions = Vec::with_capacity(rows.len());
        let mut rewards = Vec::with_capacity(rows.len());
        let mut contexts = Vec::with_capacity(rows.len() * dim);
        for (n, (action, reward, context)) in rows.into_iter().enumerate() {
            if reward != 0.0 && reward != 1.0 {
                return Err(ReplayLogError::NonBinaryReward { row: n, reward });
            }
            if context.len() != dim {
                return Err(ReplayLogError::ContextWidthMismatch {
                    row: n,
                    expected: dim,
                    got: context.len(),
                });
            }
            actions.push(action);
            rewards.push(reward);
            contexts.extend_from_slice(&context);
        }
        Ok(Self { dim, actions, rewards, contexts })
    }

    /// Number of logged rows.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Context feature dimension (0 for an empty log).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn action(&self, row: usize) -> usize {
        self.actions[row]
    }

    pub fn reward(&self, row: usize) -> f64 {
        self.rewards[row]
    }

    pub fn context(&self, row: usize) -> &[f64] {
        &self.contexts[row * self.dim..(row + 1) * self.dim]
    }

    /// Largest logged action index, if any row exists.
    pub fn max_action(&self) -> Option<usize> {
        self.actions.iter().copied().max()
    }
}
