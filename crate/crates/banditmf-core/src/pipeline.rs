//! End-to-end cold-start pipeline: fit latent factors offline, cluster the
//! predicted rating rows into shared preference profiles, then serve a new
//! user online by treating each profile as a bandit arm.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bandit::{normalize_reward, Algorithm, BanditError, PolicyState, RoundRecord, SessionTrace};
use crate::clustering::{kmeans, unified_ratings, ClusterError, ClusterModel};
use crate::matrix::{DenseMatrix, MatrixError, RatingMatrix};
use crate::metrics::{self, MetricsError};
use crate::mf::{train_bias, LatentModel, SgdConfig, TrainError};
use crate::seed;

/// Iteration cap for the clustering stage.
const KMEANS_MAX_ITER: usize = 300;

/// Error raised while fitting or serving the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    InvalidParams(&'static str),
    /// The environment and the fitted model disagree on catalog size.
    ItemCountMismatch { environment: usize, model: usize },
    /// Every item has been recommended already.
    ItemsExhausted { arm: usize },
    /// Expected rewards and ideal rankings need at least one ratable item.
    EnvironmentHasNoRatings,
    Train(TrainError),
    Cluster(ClusterError),
    Bandit(BanditError),
    Matrix(MatrixError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::InvalidParams(msg) => write!(f, "invalid pipeline params: {msg}"),
            PipelineError::ItemCountMismatch { environment, model } => {
                write!(f, "environment has {environment} items, model expects {model}")
            }
            PipelineError::ItemsExhausted { arm } => {
                write!(f, "arm {arm} has no unrecommended items left")
            }
            PipelineError::EnvironmentHasNoRatings => {
                write!(f, "environment rates no items at all")
            }
            PipelineError::Train(e) => write!(f, "offline training failed: {e}"),
            PipelineError::Cluster(e) => write!(f, "clustering failed: {e}"),
            PipelineError::Bandit(e) => write!(f, "bandit step failed: {e}"),
            PipelineError::Matrix(e) => write!(f, "matrix update failed: {e}"),
        }
    }
}

impl core::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            PipelineError::Train(e) => Some(e),
            PipelineError::Cluster(e) => Some(e),
            PipelineError::Bandit(e) => Some(e),
            PipelineError::Matrix(e) => Some(e),
            _ => None,
        }
    }
}

impl From<TrainError> for PipelineError {
    fn from(e: TrainError) -> Self {
        PipelineError::Train(e)
    }
}

impl From<ClusterError> for PipelineError {
    fn from(e: ClusterError) -> Self {
        PipelineError::Cluster(e)
    }
}

impl From<BanditError> for PipelineError {
    fn from(e: BanditError) -> Self {
        PipelineError::Bandit(e)
    }
}

impl From<MatrixError> for PipelineError {
    fn from(e: MatrixError) -> Self {
        PipelineError::Matrix(e)
    }
}

/// Output of the offline stage: the fitted factor model, the clustering of
/// its predicted rating rows, and one unified preference row per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineModel {
    pub latent: LatentModel,
    pub clusters: ClusterModel,
    /// `num_clusters x num_items`; row `c` holds cluster `c`'s predicted
    /// rating for every item.
    pub unified: DenseMatrix,
}

impl OfflineModel {
    pub fn num_clusters(&self) -> usize {
        self.unified.rows()
    }

    pub fn num_items(&self) -> usize {
        self.unified.cols()
    }
}

/// Fits the offline stage on observed ratings.
///
/// Trains the bias factor model, fills in the complete predicted rating
/// matrix, and clusters its rows. `sgd.seed` is ignored; the training and
/// clustering seeds both derive from `master_seed` so one number pins the
/// whole fit.
pub fn offline_fit(
    train: &RatingMatrix,
    sgd: &SgdConfig,
    k_clusters: usize,
    n_init: usize,
    master_seed: u64,
) -> Result<OfflineModel, PipelineError> {
    let mut config = sgd.clone();
    config.seed = seed::derive_seed(master_seed, "offline/mf");
    let latent = train_bias(train, &config)?;
    let predicted = latent.predict_full();
    let clusters = kmeans(
        &predicted,
        k_clusters,
        n_init,
        KMEANS_MAX_ITER,
        seed::derive_seed(master_seed, "offline/kmeans"),
    )?;
    let unified = unified_ratings(&clusters);
    Ok(OfflineModel { latent, clusters, unified })
}

/// Ground truth for one simulated cold user: how they would rate each
/// catalog item, with `None` for items they cannot rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ColdUserEnvironment {
    ratings: Vec<Option<f64>>,
    rating_max: f64,
}

impl ColdUserEnvironment {
    pub fn new(ratings: Vec<Option<f64>>, rating_max: f64) -> Result<Self, PipelineError> {
        if ratings.is_empty() {
            return Err(PipelineError::InvalidParams("environment needs at least one item"));
        }
        if !(rating_max.is_finite() && rating_max > 0.0) {
            return Err(PipelineError::InvalidParams("rating scale must be positive"));
        }
        for r in ratings.iter().flatten() {
            if !(r.is_finite() && (0.0..=rating_max).contains(r)) {
                return Err(PipelineError::InvalidParams("ratings must lie on the scale"));
            }
        }
        Ok(Self { ratings, rating_max })
    }

    /// Builds the environment from one user's observed row.
    ///
    /// # Panics
    /// Panics if `user` is out of range.
    pub fn from_matrix_row(matrix: &RatingMatrix, user: usize) -> Self {
        let mut ratings = vec![None; matrix.num_items()];
        let (items, values) = matrix.user_row(user);
        for (&item, &value) in items.iter().zip(values) {
            ratings[item] = Some(value);
        }
        Self { ratings, rating_max: matrix.rating_max() }
    }

    pub fn num_items(&self) -> usize {
        self.ratings.len()
    }

    pub fn rating_max(&self) -> f64 {
        self.rating_max
    }

    /// How many items this user can rate.
    pub fn num_rated(&self) -> usize {
        self.ratings.iter().flatten().count()
    }

    pub fn covers(&self, item: usize) -> bool {
        self.ratings[item].is_some()
    }

    /// The user's rating for `item`, if they can rate it.
    ///
    /// # Panics
    /// Panics if `item` is out of range.
    pub fn rate(&self, item: usize) -> Option<f64> {
        self.ratings[item]
    }
}

/// What to do when the user cannot rate a recommended item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingHandling {
    /// Consume the item without reward, feedback, or quota credit.
    Skip,
    /// Substitute the chosen cluster's predicted value (clamped to the
    /// rating scale) and count the round normally.
    ImputeClusterValue,
}

/// One finished online session for a cold user.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSession {
    /// Identifier the caller assigned to the cold user.
    pub user: usize,
    /// Final bandit state after all feedback.
    pub policy: PolicyState,
    /// Every item proposed, in order, including skipped ones.
    pub recommended: Vec<usize>,
    /// Ratings actually collected (realized plus imputed).
    pub collected: usize,
    /// Target number of ratings.
    pub tau: usize,
    /// Records and prefix sums for the counted rounds.
    pub trace: SessionTrace,
}

impl OnlineSession {
    /// Whether the session gathered its full rating quota.
    pub fn reached_quota(&self) -> bool {
        self.collected >= self.tau
    }
}

/// Item indices of one unified row, best value first (ties: lowest item).
fn preference_order(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    order
}

/// Expected per-round reward of each cluster arm over `horizon` rounds:
/// the arm walks its own preference order and averages the normalized
/// ratings of the first `horizon` items the environment covers.
pub fn cluster_expected_rewards(
    unified: &DenseMatrix,
    env: &ColdUserEnvironment,
    horizon: usize,
) -> Result<Vec<f64>, PipelineError> {
    if horizon == 0 {
        return Err(PipelineError::InvalidParams("horizon must be at least 1"));
    }
    if env.num_items() != unified.cols() {
        return Err(PipelineError::ItemCountMismatch {
            environment: env.num_items(),
            model: unified.cols(),
        });
    }
    if env.num_rated() == 0 {
        return Err(PipelineError::EnvironmentHasNoRatings);
    }
    let mut expected = Vec::with_capacity(unified.rows());
    for c in 0..unified.rows() {
        let mut total = 0.0;
        let mut taken = 0usize;
        for item in preference_order(unified.row(c)) {
            if let Some(rating) = env.rate(item) {
                total += normalize_reward(rating, env.rating_max())?;
                taken += 1;
                if taken == horizon {
                    break;
                }
            }
        }
        expected.push(total / taken as f64);
    }
    Ok(expected)
}

/// Best per-round expected reward any single arm achieves over `horizon`.
pub fn session_mu_star(
    unified: &DenseMatrix,
    env: &ColdUserEnvironment,
    horizon: usize,
) -> Result<f64, PipelineError> {
    let expected = cluster_expected_rewards(unified, env, horizon)?;
    Ok(expected.iter().fold(f64::NEG_INFINITY, |best, &v| if v > best { v } else { best }))
}

/// Best discounted gain any ordering of `horizon` recommendations could
/// earn in this environment: its ratable normalized ratings, best first.
pub fn ideal_session_dcg(
    env: &ColdUserEnvironment,
    horizon: usize,
) -> Result<f64, PipelineError> {
    if horizon == 0 {
        return Err(PipelineError::InvalidParams("horizon must be at least 1"));
    }
    let mut rewards = Vec::with_capacity(env.num_rated());
    for item in 0..env.num_items() {
        if let Some(rating) = env.rate(item) {
            rewards.push(normalize_reward(rating, env.rating_max())?);
        }
    }
    if rewards.is_empty() {
        return Err(PipelineError::EnvironmentHasNoRatings);
    }
    rewards.sort_by(|a, b| b.total_cmp(a));
    rewards.truncate(horizon);
    Ok(metrics::dcg(&rewards))
}

/// Mean normalized session quality: each session's discounted gain over
/// its ideal, averaged across sessions.
pub fn session_ndcg(sessions: &[OnlineSession], ideals: &[f64]) -> Result<f64, MetricsError> {
    let achieved: Vec<f64> = sessions.iter().map(|s| metrics::dcg(&s.trace.rewards())).collect();
    metrics::ndcg(&achieved, ideals)
}

/// Serves one cold user until `tau` ratings are collected, at most
/// `max_rounds` proposals.
///
/// Each round the policy picks a cluster arm (the round counter feeding
/// selection increments every proposal), the arm recommends its
/// highest-valued item not yet proposed by anyone (ties: lowest index),
/// and the environment answers. Ratable items yield a normalized reward
/// that updates the policy; unratable ones follow `missing`. Per-round
/// expected rewards and regrets are measured against
/// [`cluster_expected_rewards`] at horizon `tau`.
///
/// Hitting `max_rounds` before the quota returns the partial session;
/// running out of catalog items is an error.
#[allow(clippy::too_many_arguments)]
pub fn run_online_session(
    offline: &OfflineModel,
    env: &ColdUserEnvironment,
    user: usize,
    algorithm: Algorithm,
    tau: usize,
    max_rounds: usize,
    missing: MissingHandling,
    session_seed: u64,
) -> Result<OnlineSession, PipelineError> {
    if tau == 0 {
        return Err(PipelineError::InvalidParams("tau must be at least 1"));
    }
    if max_rounds < tau {
        return Err(PipelineError::InvalidParams("max_rounds must be at least tau"));
    }
    if env.num_items() != offline.num_items() {
        return Err(PipelineError::ItemCountMismatch {
            environment: env.num_items(),
            model: offline.num_items(),
        });
    }
    let expected = cluster_expected_rewards(&offline.unified, env, tau)?;
    let mu_star = expected.iter().fold(f64::NEG_INFINITY, |best, &v| if v > best { v } else { best });

    let mut policy = PolicyState::new(algorithm, offline.num_clusters())?;
    let mut rng = seed::rng_from_seed(seed::derive_seed(session_seed, "online/session"));
    let mut consumed = vec![false; offline.num_items()];
    let mut recommended = Vec::new();
    let mut trace = SessionTrace::new();
    let mut collected = 0usize;
    let mut attempts = 0u64;

    while collected < tau && (attempts as usize) < max_rounds {
        attempts += 1;
        let arm = policy.select_arm(attempts, &mut rng);
        let row = offline.unified.row(arm);
        let mut pick: Option<usize> = None;
        for item in 0..row.len() {
            if consumed[item] {
                continue;
            }
            match pick {
                None => pick = Some(item),
                Some(best) if row[item] > row[best] => pick = Some(item),
                _ => {}
            }
        }
        let item = pick.ok_or(PipelineError::ItemsExhausted { arm })?;
        consumed[item] = true;
        recommended.push(item);

        let reward = match env.rate(item) {
            Some(rating) => normalize_reward(rating, env.rating_max())?,
            None => match missing {
                MissingHandling::Skip => continue,
                MissingHandling::ImputeClusterValue => {
                    let value = offline.unified.get(arm, item).clamp(0.0, env.rating_max());
                    normalize_reward(value, env.rating_max())?
                }
            },
        };
        collected += 1;
        trace.push(RoundRecord {
            round: collected,
            arm,
            item,
            reward,
            expected_reward: expected[arm],
            regret: mu_star - expected[arm],
        });
        policy.update(arm, reward)?;
    }

    Ok(OnlineSession { user, policy, recommended, collected, tau, trace })
}

/// Folds a cold user's collected ratings into the observed matrix as a new
/// final row, ready for the next offline refit.
pub fn append_user(
    matrix: &RatingMatrix,
    ratings: &[(usize, f64)],
) -> Result<RatingMatrix, PipelineError> {
    if ratings.is_empty() {
        return Err(PipelineError::InvalidParams("cold user needs at least one rating"));
    }
    let new_user = matrix.num_users();
    let mut entries: Vec<(usize, usize, f64)> = matrix.entries().collect();
    entries.extend(ratings.iter().map(|&(item, rating)| (new_user, item, rating)));
    Ok(RatingMatrix::from_entries(
        new_user + 1,
        matrix.num_items(),
        entries,
        matrix.rating_max(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_env(values: &[f64], rating_max: f64) -> ColdUserEnvironment {
        ColdUserEnvironment::new(values.iter().map(|&v| Some(v)).collect(), rating_max).unwrap()
    }

    /// Offline model whose behavior is fully determined by a hand-written
    /// unified matrix; the latent and cluster parts are minimal stand-ins.
    fn toy_offline(rows: &[&[f64]]) -> OfflineModel {
        let k = rows.len();
        let n = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let unified = DenseMatrix::from_vec(k, n, flat);
        let clusters = ClusterModel {
            k_clusters: k,
            assignment: vec![0; k],
            centroids: unified.clone(),
            inertia: 0.0,
            restart_inertias: vec![0.0],
            inertia_trace: vec![0.0],
        };
        let latent =
            LatentModel::from_parts(DenseMatrix::zeros(1, 1), DenseMatrix::zeros(n, 1), None);
        OfflineModel { latent, clusters, unified }
    }

    /// Dense two-taste-group ratings: users 0-2 love items 0-3, users 3-5
    /// love items 4-7.
    fn block_matrix() -> RatingMatrix {
        let mut entries = Vec::new();
        for u in 0..6usize {
            for i in 0..8usize {
                let same_block = (u < 3) == (i < 4);
                let base = if same_block { 4.4 } else { 1.4 };
                let jitter = ((u * 8 + i) % 3) as f64 * 0.1;
                entries.push((u, i, base + jitter));
            }
        }
        RatingMatrix::from_entries(6, 8, entries, 5.0).unwrap()
    }

    fn block_sgd() -> SgdConfig {
        SgdConfig {
            latent_dim: 2,
            learning_rate: 0.01,
            regularization: 0.05,
            epochs: 300,
            init_scale: 0.1,
            seed: 0,
        }
    }

    #[test]
    fn offline_fit_shapes_and_group_recovery() {
        let matrix = block_matrix();
        let model = offline_fit(&matrix, &block_sgd(), 2, 4, 77).unwrap();
        assert_eq!(model.num_clusters(), 2);
        assert_eq!(model.num_items(), 8);
        assert_eq!(model.latent.num_users(), 6);
        assert_eq!(model.clusters.assignment.len(), 6);
        // The two taste groups should land in different clusters.
        let a = model.clusters.assignment[0];
        assert!(model.clusters.assignment[..3].iter().all(|&c| c == a));
        assert!(model.clusters.assignment[3..].iter().all(|&c| c != a));
    }

    #[test]
    fn offline_fit_is_seed_deterministic() {
        let matrix = block_matrix();
        let one = offline_fit(&matrix, &block_sgd(), 2, 4, 99).unwrap();
        let two = offline_fit(&matrix, &block_sgd(), 2, 4, 99).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn environment_validation_and_lookup() {
        let env = ColdUserEnvironment::new(vec![Some(3.0), None, Some(5.0)], 5.0).unwrap();
        assert_eq!(env.num_items(), 3);
        assert_eq!(env.num_rated(), 2);
        assert!(env.covers(0) && !env.covers(1));
        assert_eq!(env.rate(2), Some(5.0));
        assert!(ColdUserEnvironment::new(vec![], 5.0).is_err());
        assert!(ColdUserEnvironment::new(vec![Some(1.0)], 0.0).is_err());
        assert!(ColdUserEnvironment::new(vec![Some(9.0)], 5.0).is_err());
    }

    #[test]
    fn environment_from_sparse_row() {
        let matrix =
            RatingMatrix::from_entries(2, 4, vec![(0, 1, 4.0), (0, 3, 2.0), (1, 0, 5.0)], 5.0)
                .unwrap();
        let env = ColdUserEnvironment::from_matrix_row(&matrix, 0);
        assert_eq!(env.rate(0), None);
        assert_eq!(env.rate(1), Some(4.0));
        assert_eq!(env.rate(2), None);
        assert_eq!(env.rate(3), Some(2.0));
        assert_eq!(env.rating_max(), 5.0);
    }

    #[test]
    fn expected_rewards_enumerate_each_arms_walk() {
        let offline = toy_offline(&[&[4.0, 3.0, 2.0, 1.0], &[1.0, 2.0, 3.0, 4.0]]);
        let env = full_env(&[2.0, 3.0, 1.0, 5.0], 5.0);
        let expected = cluster_expected_rewards(&offline.unified, &env, 2).unwrap();
        // Arm 0 walks items [0, 1]: (0.4 + 0.6) / 2. Arm 1 walks [3, 2]:
        // (1.0 + 0.2) / 2.
        assert!((expected[0] - 0.5).abs() < 1e-15);
        assert!((expected[1] - 0.6).abs() < 1e-15);
        assert!((session_mu_star(&offline.unified, &env, 2).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn expected_rewards_skip_unratable_items() {
        let offline = toy_offline(&[&[4.0, 3.0, 2.0, 1.0]]);
        let env =
            ColdUserEnvironment::new(vec![None, Some(4.0), None, Some(1.0)], 5.0).unwrap();
        // The walk 0,1,2,3 keeps only rated items 1 and 3.
        let expected = cluster_expected_rewards(&offline.unified, &env, 2).unwrap();
        assert!((expected[0] - 0.5).abs() < 1e-15);
        // Horizon larger than coverage averages what exists.
        let expected = cluster_expected_rewards(&offline.unified, &env, 10).unwrap();
        assert!((expected[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expected_rewards_validation() {
        let offline = toy_offline(&[&[1.0, 2.0]]);
        let env = full_env(&[1.0, 2.0], 5.0);
        assert!(matches!(
            cluster_expected_rewards(&offline.unified, &env, 0),
            Err(PipelineError::InvalidParams(_))
        ));
        let wrong = full_env(&[1.0, 2.0, 3.0], 5.0);
        assert!(matches!(
            cluster_expected_rewards(&offline.unified, &wrong, 1),
            Err(PipelineError::ItemCountMismatch { environment: 3, model: 2 })
        ));
        let empty = ColdUserEnvironment::new(vec![None, None], 5.0).unwrap();
        assert!(matches!(
            cluster_expected_rewards(&offline.unified, &empty, 1),
            Err(PipelineError::EnvironmentHasNoRatings)
        ));
    }

    #[test]
    fn greedy_single_arm_walks_items_best_first() {
        let offline = toy_offline(&[&[1.0, 5.0, 3.0, 4.0, 2.0]]);
        let env = full_env(&[3.0; 5], 5.0);
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            3,
            100,
            MissingHandling::Skip,
            11,
        )
        .unwrap();
        assert_eq!(session.recommended, vec![1, 3, 2]);
        assert_eq!(session.collected, 3);
        assert!(session.reached_quota());
        assert_eq!(session.trace.len(), 3);
        for (n, record) in session.trace.rounds.iter().enumerate() {
            assert_eq!(record.round, n + 1);
            assert!((record.reward - 0.6).abs() < 1e-15);
            // One arm means no regret against the best arm.
            assert_eq!(record.regret, 0.0);
        }
    }

    #[test]
    fn quota_of_one_updates_the_policy_exactly_once() {
        let offline = toy_offline(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let env = full_env(&[4.0, 2.0], 5.0);
        let session = run_online_session(
            &offline,
            &env,
            7,
            Algorithm::ThompsonSampling,
            1,
            10,
            MissingHandling::Skip,
            5,
        )
        .unwrap();
        assert_eq!(session.collected, 1);
        assert_eq!(session.trace.len(), 1);
        let total_pulls: u64 = (0..2).map(|a| session.policy.pull_count(a)).sum();
        assert_eq!(total_pulls, 1);
        assert_eq!(session.user, 7);
    }

    #[test]
    fn skipped_items_are_consumed_but_uncounted() {
        let offline = toy_offline(&[&[1.0, 5.0, 3.0, 4.0, 2.0]]);
        let env = ColdUserEnvironment::new(
            vec![Some(3.0), None, Some(3.0), Some(3.0), Some(3.0)],
            5.0,
        )
        .unwrap();
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            3,
            100,
            MissingHandling::Skip,
            11,
        )
        .unwrap();
        // The best item (1) is proposed and burned, yet never counted.
        assert_eq!(session.recommended, vec![1, 3, 2, 4]);
        assert_eq!(session.collected, 3);
        assert_eq!(session.trace.len(), 3);
        let items: Vec<usize> = session.trace.rounds.iter().map(|r| r.item).collect();
        assert_eq!(items, vec![3, 2, 4]);
        assert_eq!(session.policy.pull_count(0), 3);
    }

    #[test]
    fn imputation_substitutes_the_cluster_value() {
        let offline = toy_offline(&[&[1.0, 5.0, 3.0, 4.0, 2.0]]);
        let env = ColdUserEnvironment::new(
            vec![Some(3.0), None, Some(3.0), Some(3.0), Some(3.0)],
            5.0,
        )
        .unwrap();
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            3,
            100,
            MissingHandling::ImputeClusterValue,
            11,
        )
        .unwrap();
        assert_eq!(session.recommended, vec![1, 3, 2]);
        assert_eq!(session.collected, 3);
        // Item 1 is unratable; its round carries the cluster's own value
        // 5.0, normalized to 1.0.
        assert_eq!(session.trace.rounds[0].item, 1);
        assert!((session.trace.rounds[0].reward - 1.0).abs() < 1e-15);
        assert!((session.trace.rounds[1].reward - 0.6).abs() < 1e-15);
    }

    #[test]
    fn imputed_values_clamp_to_the_rating_scale() {
        // Cluster value 7.2 exceeds the scale; the imputed reward caps at 1.
        let offline = toy_offline(&[&[7.2, 2.0]]);
        let env = ColdUserEnvironment::new(vec![None, Some(2.0)], 5.0).unwrap();
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            2,
            10,
            MissingHandling::ImputeClusterValue,
            3,
        )
        .unwrap();
        assert!((session.trace.rounds[0].reward - 1.0).abs() < 1e-15);
    }

    #[test]
    fn catalog_exhaustion_is_an_error() {
        let offline = toy_offline(&[&[3.0, 2.0, 1.0]]);
        let env = ColdUserEnvironment::new(vec![Some(3.0), None, None], 5.0).unwrap();
        let result = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            2,
            50,
            MissingHandling::Skip,
            1,
        );
        assert_eq!(result, Err(PipelineError::ItemsExhausted { arm: 0 }));
    }

    #[test]
    fn round_cap_returns_a_partial_session() {
        let offline = toy_offline(&[&[3.0, 2.0, 1.0]]);
        let env = ColdUserEnvironment::new(vec![Some(3.0), None, None], 5.0).unwrap();
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            2,
            3,
            MissingHandling::Skip,
            1,
        )
        .unwrap();
        assert_eq!(session.collected, 1);
        assert!(!session.reached_quota());
        assert_eq!(session.recommended.len(), 3);
    }

    #[test]
    fn sessions_replay_bit_for_bit() {
        let offline = toy_offline(&[&[4.0, 1.0, 3.0], &[1.0, 4.0, 2.0]]);
        let env = full_env(&[4.0, 1.0, 3.0], 5.0);
        let run = |seed| {
            run_online_session(
                &offline,
                &env,
                0,
                Algorithm::ThompsonSampling,
                3,
                50,
                MissingHandling::Skip,
                seed,
            )
            .unwrap()
        };
        assert_eq!(run(21), run(21));
    }

    #[test]
    fn thompson_concentrates_on_the_matching_cluster() {
        // Three clusters, each preferring its own ten-item block; the cold
        // user loves block 0.
        let n = 30usize;
        let mut rows = Vec::new();
        for c in 0..3usize {
            let mut row = vec![1.0; n];
            for i in 0..10 {
                row[c * 10 + i] = 5.0 - 0.09 * i as f64;
            }
            rows.push(row);
        }
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let offline = toy_offline(&refs);
        let mut truth = vec![1.0; n];
        for v in truth.iter_mut().take(10) {
            *v = 4.5;
        }
        let env = full_env(&truth, 5.0);
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::ThompsonSampling,
            20,
            200,
            MissingHandling::Skip,
            3,
        )
        .unwrap();
        let pulls0 = session.policy.pull_count(0);
        let total: u64 = (0..3).map(|a| session.policy.pull_count(a)).sum();
        assert_eq!(total, 20);
        assert!(
            pulls0 as f64 / total as f64 > 1.0 / 3.0,
            "matching arm took only {pulls0}/{total} pulls"
        );
    }

    #[test]
    fn ideal_gain_ranks_ratable_rewards_best_first() {
        let env = ColdUserEnvironment::new(
            vec![Some(2.0), None, Some(5.0), Some(4.0)],
            5.0,
        )
        .unwrap();
        // Best two normalized ratings are 1.0 and 0.8: gain 1.0 + 0.8.
        let ideal = ideal_session_dcg(&env, 2).unwrap();
        assert!((ideal - 1.8).abs() < 1e-15);
        // Horizon beyond coverage uses all three rated items.
        let ideal = ideal_session_dcg(&env, 10).unwrap();
        let want = 1.0 + 0.8 + 0.4 / 3f64.log2();
        assert!((ideal - want).abs() < 1e-12);
        let empty = ColdUserEnvironment::new(vec![None], 5.0).unwrap();
        assert!(matches!(
            ideal_session_dcg(&empty, 2),
            Err(PipelineError::EnvironmentHasNoRatings)
        ));
    }

    #[test]
    fn session_quality_normalizes_against_ideals() {
        let offline = toy_offline(&[&[5.0, 4.0, 3.0, 2.0]]);
        let env = full_env(&[5.0, 4.0, 3.0, 2.0], 5.0);
        let session = run_online_session(
            &offline,
            &env,
            0,
            Algorithm::EpsilonGreedy { epsilon: 0.0 },
            3,
            50,
            MissingHandling::Skip,
            2,
        )
        .unwrap();
        // The single arm's order equals the true order, so quality is 1.
        let ideal = ideal_session_dcg(&env, 3).unwrap();
        let score = session_ndcg(core::slice::from_ref(&session), &[ideal]).unwrap();
        assert!((score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn appended_user_becomes_the_final_row() {
        let matrix =
            RatingMatrix::from_entries(2, 3, vec![(0, 0, 5.0), (1, 2, 3.0)], 5.0).unwrap();
        let grown = append_user(&matrix, &[(1, 4.0), (0, 2.0)]).unwrap();
        assert_eq!(grown.num_users(), 3);
        assert_eq!(grown.num_items(), 3);
        assert_eq!(grown.len(), 4);
        assert_eq!(grown.get(2, 0), Some(2.0));
        assert_eq!(grown.get(2, 1), Some(4.0));
        assert_eq!(grown.get(0, 0), Some(5.0));
    }

    #[test]
    fn append_user_validation() {
        let matrix = RatingMatrix::from_entries(1, 2, vec![(0, 0, 1.0)], 5.0).unwrap();
        assert!(matches!(
            append_user(&matrix, &[]),
            Err(PipelineError::InvalidParams(_))
        ));
        assert!(matches!(
            append_user(&matrix, &[(0, 1.0), (0, 2.0)]),
            Err(PipelineError::Matrix(_))
        ));
        assert!(matches!(
            append_user(&matrix, &[(9, 1.0)]),
            Err(PipelineError::Matrix(_))
        ));
    }
}
