//! Rank-discounted gain metrics for scoring recommendation sessions.

use core::fmt;

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float as _;

/// Error raised by metric aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    LengthMismatch { achieved: usize, ideal: usize },
    EmptyInput,
    /// Normalization divides by the ideal gain, so it must be positive.
    NonPositiveIdeal { index: usize },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch { achieved, ideal } => {
                write!(f, "got {achieved} achieved values but {ideal} ideals")
            }
            MetricsError::EmptyInput => write!(f, "need at least one session"),
            MetricsError::NonPositiveIdeal { index } => {
                write!(f, "ideal gain at index {index} is not positive")
            }
        }
    }
}

impl core::error::Error for MetricsError {}

/// Discounted cumulative gain of a reward sequence in presentation order:
/// the first reward counts fully, the reward at 1-based position `t >= 2`
/// is divided by `log2(t)`. Empty input scores 0.
pub fn dcg(rewards: &[f64]) -> f64 {
    rewards
        .iter()
        .enumerate()
        .map(|(i, &r)| if i == 0 { r } else { r / ((i + 1) as f64).log2() })
        .sum()
}

/// Mean of per-session `achieved / ideal` gain ratios.
///
/// `achieved[i]` and `ideal[i]` describe the same session; every ideal must
/// be positive.
pub fn ndcg(achieved: &[f64], ideal: &[f64]) -> Result<f64, MetricsError> {
    if achieved.len() != ideal.len() {
        return Err(MetricsError::LengthMismatch {
            achieved: achieved.len(),
            ideal: ideal.len(),
        });
    }
    if achieved.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut total = 0.0;
    for (i, (&got, &best)) in achieved.iter().zip(ideal).enumerate() {
        if !(best > 0.0) {
            return Err(MetricsError::NonPositiveIdeal { index: i });
        }
        total += got / best;
    }
    Ok(total / achieved.len() as f64)
}
