//! `train-mf`: fit a factor model on the full ratings file and save it with
//! its training metrics.

use std::collections::BTreeMap;
use std::path::PathBuf;

use banditmf_core::{train_base, train_bias};
use clap::Args;

use crate::commands::{self, SgdFlags};
use crate::config::Resolver;
use crate::model_io;
use crate::UsageError;

#[derive(Args, Debug, Default)]
pub struct TrainMfArgs {
    /// Ratings file to train on.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Input format: sparse or dense.
    #[arg(long)]
    pub format: Option<String>,
    /// Rating scale override.
    #[arg(long)]
    pub rating_max: Option<f64>,
    /// Model variant: base (factors only) or bias (adds mean and offsets).
    #[arg(long)]
    pub variant: Option<String>,
    #[command(flatten)]
    pub sgd: SgdFlags,
    /// Training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(
    args: TrainMfArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("train-mf", file);
    let table =
        commands::resolve_ratings(&mut resolver, args.ratings, args.format, args.rating_max)?;
    let variant = resolver.value("variant", args.variant, "bias".to_string())?;
    let mut sgd = commands::resolve_sgd(&mut resolver, &args.sgd)?;
    sgd.seed = resolver.value("seed", args.seed, sgd.seed)?;
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/train-mf")?;

    let model = match variant.as_str() {
        "base" => train_base(&table.matrix, &sgd)?,
        "bias" => train_bias(&table.matrix, &sgd)?,
        other => {
            return Err(UsageError(format!(
                "unknown variant {other:?}; expected base or bias"
            ))
            .into())
        }
    };
    let train_mse = model.mse(&table.matrix)?;
    let train_loss = model.loss(&table.matrix, sgd.regularization);

    model_io::save_model(&out.join("model.txt"), &model)?;
    let metrics = format!(
        "metric,value\ntrain_mse,{train_mse}\ntrain_loss,{train_loss}\nepochs,{}\n",
        sgd.epochs
    );
    std::fs::write(out.join("metrics.csv"), metrics)?;
    commands::finish_manifest(resolver, &out)?;

    println!(
        "train-mf: {variant} k={} on {}x{}, train MSE {train_mse:.6} -> {}",
        sgd.latent_dim,
        table.matrix.num_users(),
        table.matrix.num_items(),
        out.display()
    );
    Ok(())
}
