//! CLI subcommand implementations.
//!
//! Every command resolves its parameters through [`crate::config::Resolver`]
//! (flag over config file over default), runs, writes its outputs plus a
//! `manifest.txt` into the output directory, and prints a one-line summary.

pub mod cluster;
pub mod eval_mf;
pub mod hybrid;
pub mod ingest;
pub mod recommend;
pub mod replay_linucb;
pub mod report_cmd;
pub mod simulate;
pub mod train_mf;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use banditmf_core::SgdConfig;
use clap::Args;

use crate::config::{self, ConfigError, Resolver};
use crate::io::{self, IoError, RatingsTable};
use crate::model_io::ModelIoError;
use crate::report::ReportError;
use crate::UsageError;

/// Wraps an error so that "the input file does not exist" surfaces as a
/// usage error (exit code 2) instead of a computation failure.
pub trait InputError: std::error::Error + Send + Sync + Sized + 'static {
    fn is_missing_input(&self) -> bool;

    fn into_anyhow(self) -> anyhow::Error {
        if self.is_missing_input() {
            anyhow::Error::new(UsageError(self.to_string()))
        } else {
            anyhow::Error::new(self)
        }
    }
}

impl InputError for IoError {
    fn is_missing_input(&self) -> bool {
        self.is_missing()
    }
}

impl InputError for ModelIoError {
    fn is_missing_input(&self) -> bool {
        self.is_missing()
    }
}

impl InputError for ConfigError {
    fn is_missing_input(&self) -> bool {
        self.is_missing()
    }
}

impl InputError for ReportError {
    fn is_missing_input(&self) -> bool {
        self.is_missing()
    }
}

/// Loads the config file named by the command (or an empty map), unless the
/// dispatcher already supplied one (the `--from-manifest` path).
pub(crate) fn effective_config(
    supplied: Option<BTreeMap<String, String>>,
    config_flag: Option<&Path>,
) -> anyhow::Result<BTreeMap<String, String>> {
    match supplied {
        Some(map) => Ok(map),
        None => config::load_config(config_flag).map_err(InputError::into_anyhow),
    }
}

/// Resolves the output directory (override > flag > config > default),
/// creates it, and records it in the manifest.
pub(crate) fn prepare_out(
    resolver: &mut Resolver,
    flag: Option<PathBuf>,
    out_override: Option<PathBuf>,
    default: &str,
) -> anyhow::Result<PathBuf> {
    let dir = match out_override {
        Some(dir) => {
            resolver.note("out", dir.display());
            dir
        }
        None => resolver
            .opt_path("out", flag)
            .unwrap_or_else(|| {
                let dir = PathBuf::from(default);
                resolver.note("out", dir.display());
                dir
            }),
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Writes `manifest.txt` from the resolver's recorded values.
pub(crate) fn finish_manifest(resolver: Resolver, out_dir: &Path) -> anyhow::Result<()> {
    config::write_manifest(out_dir, &resolver.into_manifest())?;
    Ok(())
}

/// Gradient-descent hyperparameters shared by every command that trains a
/// factor model.
#[derive(Args, Debug, Default, Clone)]
pub struct SgdFlags {
    /// Latent factors per user/item.
    #[arg(long)]
    pub factors: Option<usize>,
    /// SGD step size.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// L2 penalty weight.
    #[arg(long)]
    pub regularization: Option<f64>,
    /// Full passes over the training entries.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Factor initialization half-width.
    #[arg(long)]
    pub init_scale: Option<f64>,
}

/// Resolves the SGD hyperparameters; the caller supplies the seed.
pub(crate) fn resolve_sgd(
    resolver: &mut Resolver,
    flags: &SgdFlags,
) -> Result<SgdConfig, UsageError> {
    let defaults = SgdConfig::default();
    Ok(SgdConfig {
        latent_dim: resolver.value("factors", flags.factors, defaults.latent_dim)?,
        learning_rate: resolver.value(
            "learning-rate",
            flags.learning_rate,
            defaults.learning_rate,
        )?,
        regularization: resolver.value(
            "regularization",
            flags.regularization,
            defaults.regularization,
        )?,
        epochs: resolver.value("epochs", flags.epochs, defaults.epochs)?,
        init_scale: resolver.value("init-scale", flags.init_scale, defaults.init_scale)?,
        seed: defaults.seed,
    })
}

/// Loads a ratings file in either supported format. Dense grids get
/// synthetic external ids (their own indices).
pub(crate) fn load_ratings_any(
    path: &Path,
    format: &str,
    rating_max: Option<f64>,
) -> anyhow::Result<RatingsTable> {
    match format {
        "sparse" => io::load_ratings_csv(path, rating_max).map_err(InputError::into_anyhow),
        "dense" => {
            let matrix = io::load_dense_matrix(path, rating_max)
                .map_err(InputError::into_anyhow)?;
            let user_ids = (0..matrix.num_users()).map(|u| u.to_string()).collect();
            let item_ids = (0..matrix.num_items()).map(|i| i.to_string()).collect();
            Ok(RatingsTable { matrix, user_ids, item_ids })
        }
        other => Err(UsageError(format!(
            "unknown ratings format {other:?}; expected sparse or dense"
        ))
        .into()),
    }
}

/// Resolves the shared ratings-input parameters (`ratings`, `format`,
/// `rating-max`) and loads the table.
pub(crate) fn resolve_ratings(
    resolver: &mut Resolver,
    ratings_flag: Option<PathBuf>,
    format_flag: Option<String>,
    rating_max_flag: Option<f64>,
) -> anyhow::Result<RatingsTable> {
    let path = resolver.require_path("ratings", ratings_flag)?;
    let format = resolver.value("format", format_flag, "sparse".to_string())?;
    let rating_max = resolver.optional("rating-max", rating_max_flag)?;
    load_ratings_any(&path, &format, rating_max)
}
