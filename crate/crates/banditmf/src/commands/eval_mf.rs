//! `eval-mf`: holdout comparison of the base and bias model variants over
//! several seeded replicates.

use std::collections::BTreeMap;
use std::path::PathBuf;

use banditmf_core::seed::derive_indexed_seed;
use banditmf_core::{train_base, train_bias};
use clap::Args;

use crate::commands::{self, SgdFlags};
use crate::config::Resolver;
use crate::UsageError;

#[derive(Args, Debug, Default)]
pub struct EvalMfArgs {
    /// Ratings file to evaluate on.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Input format: sparse or dense.
    #[arg(long)]
    pub format: Option<String>,
    /// Rating scale override.
    #[arg(long)]
    pub rating_max: Option<f64>,
    #[command(flatten)]
    pub sgd: SgdFlags,
    /// Fraction of entries held out for testing.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Number of seeded replicates.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Master seed the replicate seeds derive from.
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
    args: EvalMfArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("eval-mf", file);
    let table =
        commands::resolve_ratings(&mut resolver, args.ratings, args.format, args.rating_max)?;
    let sgd = commands::resolve_sgd(&mut resolver, &args.sgd)?;
    let holdout = resolver.value("holdout", args.holdout, 0.2)?;
    let seeds = resolver.value("seeds", args.seeds, 10)?;
    let master = resolver.value("seed", args.seed, 42)?;
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/eval-mf")?;
    if seeds == 0 {
        return Err(UsageError("need at least one replicate".into()).into());
    }

    let mut metrics = String::from("replicate,split_seed,train_seed,base_mse,bias_mse,improvement\n");
    let mut base_sum = 0.0;
    let mut bias_sum = 0.0;
    let mut improvement_sum = 0.0;
    for replicate in 0..seeds {
        let split_seed = derive_indexed_seed(master, "eval/split", replicate);
        let train_seed = derive_indexed_seed(master, "eval/train", replicate);
        let (train, test) = table.matrix.split_holdout(holdout, split_seed)?;
        let config = banditmf_core::SgdConfig { seed: train_seed, ..sgd.clone() };
        let base_mse = train_base(&train, &config)?.mse(&test)?;
        let bias_mse = train_bias(&train, &config)?.mse(&test)?;
        let improvement = (base_mse - bias_mse) / base_mse;
        metrics.push_str(&format!(
            "{replicate},{split_seed},{train_seed},{base_mse},{bias_mse},{improvement}\n"
        ));
        base_sum += base_mse;
        bias_sum += bias_mse;
        improvement_sum += improvement;
    }
    let n = seeds as f64;
    let summary = format!(
        "replicates,mean_base_mse,mean_bias_mse,mean_improvement\n{seeds},{},{},{}\n",
        base_sum / n,
        bias_sum / n,
        improvement_sum / n
    );
    std::fs::write(out.join("metrics.csv"), metrics)?;
    std::fs::write(out.join("summary.csv"), &summary)?;
    commands::finish_manifest(resolver, &out)?;

    println!(
        "eval-mf: {seeds} replicates, holdout {holdout}: base MSE {:.6}, bias MSE {:.6} ({:+.1}%) -> {}",
        base_sum / n,
        bias_sum / n,
        100.0 * improvement_sum / n,
        out.display()
    );
    Ok(())
}
