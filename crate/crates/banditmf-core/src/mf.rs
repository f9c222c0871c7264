//! Matrix factorization trained by stochastic gradient descent.
//!
//! Two variants share the same factor machinery:
//!
//! * **base** — the rating is modeled as the inner product of a user factor
//!   row and an item factor row;
//! * **bias** — the inner product is offset by a frozen global mean plus
//!   learned per-user and per-item bias terms.
//!
//! The learning rate is the *effective* step size: one observed pair
//! `(u, i, r)` moves the factors by
//!
//! ```text
//! error = r - prediction            (computed before any update)
//! item_row += lr * (error * user_row - reg * item_row)
//! user_row += lr * (error * item_row_before_update - reg * user_row)
//! ```
//!
//! i.e. both rows see each other's pre-update values.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::matrix::{DenseMatrix, RatingMatrix};
use crate::seed;

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float as _;

/// SGD hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    /// Number of latent factors per user/item.
    pub latent_dim: usize,
    /// Effective step size.
    pub learning_rate: f64,
    /// L2 penalty weight.
    pub regularization: f64,
    /// Full passes over the observed entries.
    pub epochs: usize,
    /// Factors initialize uniformly in `(-init_scale, init_scale)`.
    pub init_scale: f64,
    /// Seed for initialization and epoch shuffling.
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            latent_dim: 2,
            learning_rate: 0.001,
            regularization: 0.1,
            epochs: 1000,
            init_scale: 0.1,
            seed: 42,
        }
    }
}

impl SgdConfig {
    fn validate(&self) -> Result<(), TrainError> {
        if self.latent_dim == 0 {
            return Err(TrainError::InvalidConfig("latent_dim must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::InvalidConfig("learning_rate must be positive"));
        }
        if !(self.regularization.is_finite() && self.regularization >= 0.0) {
            return Err(TrainError::InvalidConfig("regularization must be non-negative"));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(TrainError::InvalidConfig("init_scale must be positive"));
        }
        Ok(())
    }
}

/// Error raised by training or evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    InvalidConfig(&'static str),
    /// Training data must contain at least one rating.
    EmptyMatrix,
    /// The per-epoch squared error became non-finite or exceeded 1e12.
    Diverged { epoch: usize },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::InvalidConfig(msg) => write!(f, "invalid SGD config: {msg}"),
            TrainError::EmptyMatrix => write!(f, "rating matrix has no observed entries"),
            TrainError::Diverged { epoch } => {
                write!(f, "SGD diverged at epoch {epoch} (loss not finite or above 1e12)")
            }
        }
    }
}

impl core::error::Error for TrainError {}

/// Which prediction rule a [`LatentModel`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    Base,
    Bias,
}

/// Bias terms of the bias variant.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasTerms {
    /// Mean of the observed training ratings, frozen before SGD.
    pub global_mean: f64,
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
}

/// A trained factor model.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentModel {
    user_factors: DenseMatrix,
    item_factors: DenseMatrix,
    bias: Option<BiasTerms>,
}

impl LatentModel {
    /// Assembles a model from raw parts (used by deserialization and tests).
    ///
    /// # Panics
    /// Panics if factor widths disagree or bias lengths do not match the
    /// factor row counts.
    pub fn from_parts(
        user_factors: DenseMatrix,
        item_factors: DenseMatrix,
        bias: Option<BiasTerms>,
    ) -> Self {
        assert_eq!(
            user_factors.cols(),
            item_factors.cols(),
            "user and item factors must share the latent dimension"
        );
        if let Some(b) = &bias {
            assert_eq!(b.user_bias.len(), user_factors.rows(), "user bias length mismatch");
            assert_eq!(b.item_bias.len(), item_factors.rows(), "item bias length mismatch");
        }
        Self { user_factors, item_factors, bias }
    }

    pub fn variant(&self) -> ModelVariant {
        if self.bias.is_some() {
            ModelVariant::Bias
        } else {
            ModelVariant::Base
        }
    }

    pub fn num_users(&self) -> usize {
        self.user_factors.rows()
    }

    pub fn num_items(&self) -> usize {
        self.item_factors.rows()
    }

    pub fn latent_dim(&self) -> usize {
        self.user_factors.cols()
    }

    pub fn user_factors(&self) -> &DenseMatrix {
        &self.user_factors
    }

    pub fn item_factors(&self) -> &DenseMatrix {
        &self.item_factors
    }

    pub fn bias(&self) -> Option<&BiasTerms> {
        self.bias.as_ref()
    }

    /// Latent row of one item.
    pub fn item_factor(&self, item: usize) -> &[f64] {
        self.item_factors.row(item)
    }

    /// Latent row of one user.
    pub fn user_factor(&self, user: usize) -> &[f64] {
        self.user_factors.row(user)
    }

    /// Predicted rating for `(user, item)`.
    ///
    /// # Panics
    /// Panics if either index is out of range.
    pub fn predict(&self, user: usize, item: usize) -> f64 {
        assert!(user < self.num_users(), "user index {user} out of range");
        assert!(item < self.num_items(), "item index {item} out of range");
        let product = dot(self.user_factors.row(user), self.item_factors.row(item));
        match &self.bias {
            None => product,
            Some(b) => b.global_mean + b.user_bias[user] + b.item_bias[item] + product,
        }
    }

    /// Predicts every cell of the user-item matrix.
    pub fn predict_full(&self) -> DenseMatrix {
        let (m, n) = (self.num_users(), self.num_items());
        let mut out = DenseMatrix::zeros(m, n);
        for u in 0..m {
            let row = self.user_factors.row(u);
            let out_row = out.row_mut(u);
            for i in 0..n {
                let mut v = dot(row, self.item_factors.row(i));
                if let Some(b) = &self.bias {
                    v += b.global_mean + b.user_bias[u] + b.item_bias[i];
                }
                out_row[i] = v;
            }
        }
        out
    }

    /// Mean squared prediction error over the observed entries.
    pub fn mse(&self, matrix: &RatingMatrix) -> Result<f64, TrainError> {
        if matrix.is_empty() {
            return Err(TrainError::EmptyMatrix);
        }
        let mut sum = 0.0;
        for (u, i, r) in matrix.entries() {
            let e = r - self.predict(u, i);
            sum += e * e;
        }
        Ok(sum / matrix.len() as f64)
    }

    /// Regularized training objective summed over observed entries.
    ///
    /// The base variant penalizes `(|q| + |p|)^2` per pair (the squared sum
    /// of the two row norms); the bias variant penalizes the plain sum of
    /// squared norms plus squared biases. The asymmetry is deliberate: each
    /// variant reports the objective its formulation states.
    pub fn loss(&self, matrix: &RatingMatrix, regularization: f64) -> f64 {
        let mut total = 0.0;
        for (u, i, r) in matrix.entries() {
            let e = r - self.predict(u, i);
            let p = self.user_factors.row(u);
            let q = self.item_factors.row(i);
            let reg = match &self.bias {
                None => {
                    let s = norm(q) + norm(p);
                    s * s
                }
                Some(b) => {
                    sq_norm(q)
                        + sq_norm(p)
                        + b.user_bias[u] * b.user_bias[u]
                        + b.item_bias[i] * b.item_bias[i]
                }
            };
            total += e * e + regularization * reg;
        }
        total
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn norm(a: &[f64]) -> f64 {
    sq_norm(a).sqrt()
}

/// One SGD update for the base variant. Returns the pre-update error.
///
/// Both rows are updated from each other's pre-update values.
pub fn sgd_step_base(
    user_row: &mut [f64],
    item_row: &mut [f64],
    rating: f64,
    learning_rate: f64,
    regularization: f64,
) -> f64 {
    let e = rating - dot(user_row, item_row);
    for (p, q) in user_row.iter_mut().zip(item_row.iter_mut()) {
        let (pf, qf) = (*p, *q);
        *q = qf + learning_rate * (e * pf - regularization * qf);
        *p = pf + learning_rate * (e * qf - regularization * pf);
    }
    e
}

/// One SGD update for the bias variant. Returns the pre-update error.
#[allow(clippy::too_many_arguments)]
pub fn sgd_step_bias(
    user_row: &mut [f64],
    item_row: &mut [f64],
    user_bias: &mut f64,
    item_bias: &mut f64,
    global_mean: f64,
    rating: f64,
    learning_rate: f64,
    regularization: f64,
) -> f64 {
    let e = rating - (global_mean + *user_bias + *item_bias + dot(user_row, item_row));
    *user_bias += learning_rate * (e - regularization * *user_bias);
    *item_bias += learning_rate * (e - regularization * *item_bias);
    for (p, q) in user_row.iter_mut().zip(item_row.iter_mut()) {
        let (pf, qf) = (*p, *q);
        *q = qf + learning_rate * (e * pf - regularization * qf);
        *p = pf + learning_rate * (e * qf - regularization * pf);
    }
    e
}

/// Trains the base variant.
pub fn train_base(matrix: &RatingMatrix, config: &SgdConfig) -> Result<LatentModel, TrainError> {
    train(matrix, config, ModelVariant::Base)
}

/// Trains the bias variant. The global mean is fixed to the mean observed
/// training rating before the first epoch and never re-estimated.
pub fn train_bias(matrix: &RatingMatrix, config: &SgdConfig) -> Result<LatentModel, TrainError> {
    train(matrix, config, ModelVariant::Bias)
}

fn train(
    matrix: &RatingMatrix,
    config: &SgdConfig,
    variant: ModelVariant,
) -> Result<LatentModel, TrainError> {
    config.validate()?;
    if matrix.is_empty() {
        return Err(TrainError::EmptyMatrix);
    }
    let (m, n, k) = (matrix.num_users(), matrix.num_items(), config.latent_dim);
    let mut rng = seed::rng_from_seed(config.seed);
    let scale = config.init_scale;
    let mut user_factors = DenseMatrix::from_vec(
        m,
        k,
        (0..m * k).map(|_| rng.random_range(-scale..scale)).collect(),
    );
    let mut item_factors = DenseMatrix::from_vec(
        n,
        k,
        (0..n * k).map(|_| rng.random_range(-scale..scale)).collect(),
    );
    let mut bias = match variant {
        ModelVariant::Base => None,
        ModelVariant::Bias => Some(BiasTerms {
            global_mean: matrix.mean_rating().expect("nonempty matrix has a mean"),
            user_bias: vec![0.0; m],
            item_bias: vec![0.0; n],
        }),
    };

    let entries: Vec<(usize, usize, f64)> = matrix.entries().collect();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    let (lr, reg) = (config.learning_rate, config.regularization);
    for epoch in 0..config.epochs {
        seed::shuffle(&mut order, &mut rng);
        let mut epoch_sq_err = 0.0;
        for &idx in &order {
            let (u, i, r) = entries[idx];
            // Split borrows: user row u and item row i live in different matrices.
            let user_row = user_factors.row_mut(u);
            let item_row = item_factors.row_mut(i);
            let e = match &mut bias {
                None => sgd_step_base(user_row, item_row, r, lr, reg),
                Some(b) => {
                    let mean = b.global_mean;
                    sgd_step_bias(
                        user_row,
                        item_row,
                        &mut b.user_bias[u],
                        &mut b.item_bias[i],
                        mean,
                        r,
                        lr,
                        reg,
                    )
                }
            };
            epoch_sq_err += e * e;
        }
        if !epoch_sq_err.is_finite() || epoch_sq_err > 1e12 {
            return Err(TrainError::Diverged { epoch });
        }
    }
    Ok(LatentModel::from_parts(user_factors, item_factors, bias))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from_dense(rows: &[&[f64]], rating_max: f64) -> RatingMatrix {
        let mut entries = Vec::new();
        for (u, row) in rows.iter().enumerate() {
            for (i, &r) in row.iter().enumerate() {
                entries.push((u, i, r));
            }
        }
        RatingMatrix::from_entries(rows.len(), rows[0].len(), entries, rating_max).unwrap()
    }

    #[test]
    fn single_step_matches_hand_computation() {
        // r = 4, p = (0.1, 0.2), q = (0.3, 0.4), lr = 0.01, reg = 0.1.
        // error = 4 - 0.11 = 3.89
        let mut p = [0.1, 0.2];
        let mut q = [0.3, 0.4];
        let e = sgd_step_base(&mut p, &mut q, 4.0, 0.01, 0.1);
        assert!((e - 3.89).abs() < 1e-12);
        assert!((q[0] - 0.30359).abs() < 1e-12);
        assert!((q[1] - 0.40738).abs() < 1e-12);
        assert!((p[0] - 0.11157).abs() < 1e-12);
        assert!((p[1] - 0.21536).abs() < 1e-12);
    }

    #[test]
    fn zero_error_zero_reg_is_a_fixed_point() {
        let mut p = [0.5, -0.25];
        let mut q = [2.0, 4.0];
        // rating equals the current prediction: 0.5*2 - 0.25*4 = 0.
        let e = sgd_step_base(&mut p, &mut q, 0.0, 0.05, 0.0);
        assert_eq!(e, 0.0);
        assert_eq!(p, [0.5, -0.25]);
        assert_eq!(q, [2.0, 4.0]);
    }

    #[test]
    fn bias_step_updates_biases_toward_error() {
        let mut p = [0.0, 0.0];
        let mut q = [0.0, 0.0];
        let (mut bu, mut bi) = (0.0, 0.0);
        let e = sgd_step_bias(&mut p, &mut q, &mut bu, &mut bi, 3.0, 4.0, 0.1, 0.0);
        assert!((e - 1.0).abs() < 1e-12);
        assert!((bu - 0.1).abs() < 1e-12);
        assert!((bi - 0.1).abs() < 1e-12);
        // Zero factors stay zero: the factor gradient is error * 0.
        assert_eq!(p, [0.0, 0.0]);
        assert_eq!(q, [0.0, 0.0]);
    }

    #[test]
    fn rank_one_matrix_is_recovered() {
        // 2x2 rank-1 matrix; an unregularized k=1 model can fit it exactly.
        let m = matrix_from_dense(&[&[1.0, 2.0], &[2.0, 4.0]], 5.0);
        let cfg = SgdConfig {
            latent_dim: 1,
            learning_rate: 0.05,
            regularization: 0.0,
            epochs: 2000,
            ..SgdConfig::default()
        };
        let model = train_base(&m, &cfg).unwrap();
        assert!(model.mse(&m).unwrap() < 1e-3, "mse = {}", model.mse(&m).unwrap());
    }

    #[test]
    fn global_mean_is_frozen_training_mean() {
        let m = matrix_from_dense(&[&[1.0, 5.0], &[3.0, 2.0]], 5.0);
        let model = train_bias(&m, &SgdConfig { epochs: 3, ..SgdConfig::default() }).unwrap();
        assert_eq!(model.bias().unwrap().global_mean, m.mean_rating().unwrap());
    }

    #[test]
    fn bias_prediction_is_additive_decomposition() {
        let user_factors = DenseMatrix::from_vec(2, 2, vec![0.3, -0.1, 0.7, 0.2]);
        let item_factors = DenseMatrix::from_vec(3, 2, vec![0.5, 0.4, -0.2, 0.1, 0.9, -0.6]);
        let bias = BiasTerms {
            global_mean: 3.1,
            user_bias: vec![0.25, -0.4],
            item_bias: vec![0.05, -0.15, 0.3],
        };
        let model = LatentModel::from_parts(user_factors, item_factors, Some(bias));
        for u in 0..2 {
            for i in 0..3 {
                let b = model.bias().unwrap();
                let expected = b.global_mean
                    + b.user_bias[u]
                    + b.item_bias[i]
                    + model
                        .user_factor(u)
                        .iter()
                        .zip(model.item_factor(i))
                        .map(|(x, y)| x * y)
                        .sum::<f64>();
                assert!((model.predict(u, i) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_matches_direct_recomputation() {
        let m = matrix_from_dense(&[&[1.0, 4.0], &[2.0, 3.0]], 5.0);
        let cfg = SgdConfig { epochs: 5, ..SgdConfig::default() };
        for variant in [ModelVariant::Base, ModelVariant::Bias] {
            let model = match variant {
                ModelVariant::Base => train_base(&m, &cfg).unwrap(),
                ModelVariant::Bias => train_bias(&m, &cfg).unwrap(),
            };
            let lambda = 0.37;
            let mut expected = 0.0;
            for (u, i, r) in m.entries() {
                let e = r - model.predict(u, i);
                let p = model.user_factor(u);
                let q = model.item_factor(i);
                let np: f64 = p.iter().map(|x| x * x).sum::<f64>();
                let nq: f64 = q.iter().map(|x| x * x).sum::<f64>();
                let reg = match model.bias() {
                    None => {
                        let s = np.sqrt() + nq.sqrt();
                        s * s
                    }
                    Some(b) => {
                        np + nq
                            + b.user_bias[u] * b.user_bias[u]
                            + b.item_bias[i] * b.item_bias[i]
                    }
                };
                expected += e * e + lambda * reg;
            }
            let got = model.loss(&m, lambda);
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let m = matrix_from_dense(&[&[1.0, 4.0, 2.0], &[2.0, 3.0, 5.0]], 5.0);
        let cfg = SgdConfig { epochs: 50, ..SgdConfig::default() };
        let a = train_bias(&m, &cfg).unwrap();
        let b = train_bias(&m, &cfg).unwrap();
        assert_eq!(a, b);
        let c = train_bias(&m, &SgdConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn train_mse_trend_is_non_increasing() {
        let m = matrix_from_dense(
            &[
                &[1.0, 4.0, 2.0, 5.0],
                &[2.0, 3.0, 5.0, 1.0],
                &[4.0, 1.0, 3.0, 2.0],
            ],
            5.0,
        );
        let mse_at = |epochs: usize| {
            let cfg = SgdConfig { epochs, ..SgdConfig::default() };
            train_base(&m, &cfg).unwrap().mse(&m).unwrap()
        };
        for e in [10, 50, 100, 200] {
            let now = mse_at(e);
            let later = mse_at(e + 10);
            assert!(
                later <= now * 1.001 + 1e-9,
                "mse rose from {now} at epoch {e} to {later} at epoch {}",
                e + 10
            );
        }
    }

    #[test]
    fn huge_learning_rate_reports_divergence() {
        let m = matrix_from_dense(&[&[5.0, 5.0], &[5.0, 5.0]], 5.0);
        let cfg = SgdConfig {
            learning_rate: 10.0,
            epochs: 200,
            ..SgdConfig::default()
        };
        assert!(matches!(train_base(&m, &cfg), Err(TrainError::Diverged { .. })));
    }

    #[test]
    fn empty_matrix_rejected() {
        let m = RatingMatrix::from_entries(2, 2, vec![], 5.0).unwrap();
        assert_eq!(train_base(&m, &SgdConfig::default()), Err(TrainError::EmptyMatrix));
        let model = LatentModel::from_parts(
            DenseMatrix::zeros(2, 1),
            DenseMatrix::zeros(2, 1),
            None,
        );
        assert_eq!(model.mse(&m), Err(TrainError::EmptyMatrix));
    }

    #[test]
    #[should_panic(expected = "item index")]
    fn predict_out_of_range_panics() {
        let model = LatentModel::from_parts(
            DenseMatrix::zeros(1, 1),
            DenseMatrix::zeros(1, 1),
            None,
        );
        model.predict(0, 5);
    }

    #[test]
    fn full_prediction_covers_large_shapes() {
        // MovieLens-small-sized model: 610 users x 9724 items.
        let (m, n, k) = (610, 9724, 2);
        let model = LatentModel::from_parts(
            DenseMatrix::from_vec(m, k, vec![0.01; m * k]),
            DenseMatrix::from_vec(n, k, vec![0.02; n * k]),
            None,
        );
        let full = model.predict_full();
        assert_eq!((full.rows(), full.cols()), (m, n));
        let expected = 2.0 * 0.01 * 0.02;
        assert!((full.get(609, 9723) - expected).abs() < 1e-15);
    }

    #[test]
    fn gradient_check_against_finite_differences() {
        // The implemented step direction must equal -1/2 the gradient of
        //   e^2 + reg * (|p|^2 + |q|^2)   (plus bias squares for the bias
        // variant), verified here by central finite differences on a few
        // random instances; the acceptance suite runs the full sweep.
        use rand::Rng;
        let mut rng = seed::rng_from_seed(99);
        for _ in 0..20 {
            let k = rng.random_range(1..3usize);
            let p: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let q: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r: f64 = rng.random_range(-2.0..2.0);
            let reg: f64 = rng.random_range(0.0..0.5);
            let objective = |p: &[f64], q: &[f64]| {
                let e = r - p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>();
                e * e
                    + reg
                        * (p.iter().map(|x| x * x).sum::<f64>()
                            + q.iter().map(|x| x * x).sum::<f64>())
            };
            let mut p1 = p.clone();
            let mut q1 = q.clone();
            sgd_step_base(&mut p1, &mut q1, r, 1.0, reg);
            let h = 1e-6;
            for f in 0..k {
                let mut lo = p.clone();
                let mut hi = p.clone();
                lo[f] -= h;
                hi[f] += h;
                let grad = (objective(&hi, &q) - objective(&lo, &q)) / (2.0 * h);
                let step = p1[f] - p[f]; // equals -grad/2 at lr = 1
                let rel = (step + grad / 2.0).abs() / grad.abs().max(1e-8);
                assert!(rel < 1e-5, "user-factor gradient mismatch: rel = {rel}");
            }
        }
    }
}
