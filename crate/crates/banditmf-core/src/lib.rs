//! Core algorithms for the banditmf recommender: SGD matrix factorization,
//! neighborhood collaborative filtering, k-means preference clustering,
//! multi-armed bandits (context-free and linear contextual), and the
//! cold-start pipeline that ties them together.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature enables platform float intrinsics and nothing else. All
//! randomized routines take explicit seeds and are bitwise reproducible
//! for a given build.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bandit;
pub mod catalog;
pub mod clustering;
pub mod linalg;
pub mod linucb;
pub mod matrix;
pub mod metrics;
pub mod mf;
pub mod neighborhood;
pub mod pipeline;
pub mod replay_log;
pub mod seed;

pub use bandit::{regret_series, Algorithm, BanditError, PolicyState, RoundRecord, SessionTrace};
pub use catalog::{CatalogError, ItemCatalog, TargetUserInput};
pub use clustering::{kmeans, unified_ratings, ClusterError, ClusterModel};
pub use linucb::{replay_ctr, AlphaSchedule, LinUcbError, LinUcbState, RandomPolicy, ReplayPolicy};
pub use matrix::{DenseMatrix, MatrixError, RatingMatrix};
pub use metrics::{dcg, ndcg, MetricsError};
pub use mf::{train_base, train_bias, LatentModel, ModelVariant, SgdConfig, TrainError};
pub use neighborhood::{
    cosine, find_similar_users, pearson, recommend_hybrid, recommend_user_based, Recommendation,
    SimilarityError, SimilarityScore,
};
pub use pipeline::{
    append_user, cluster_expected_rewards, ideal_session_dcg, offline_fit, run_online_session,
    session_mu_star, session_ndcg, ColdUserEnvironment, MissingHandling, OfflineModel,
    OnlineSession, PipelineError,
};
pub use replay_log::ReplayLog;
