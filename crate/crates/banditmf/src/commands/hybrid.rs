//! `hybrid`: recommend for a known user by seeding on their best predicted
//! item and ranking the rest by latent-space similarity to it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use banditmf_core::{recommend_hybrid, train_bias};
use clap::Args;

use crate::commands::{self, recommend::build_catalog, recommend::write_recommendations, SgdFlags};
use crate::config::Resolver;
use crate::UsageError;

#[derive(Args, Debug, Default)]
pub struct HybridArgs {
    /// Ratings file to train on.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Input format: sparse or dense.
    #[arg(long)]
    pub format: Option<String>,
    /// Rating scale override.
    #[arg(long)]
    pub rating_max: Option<f64>,
    /// External id of the user to recommend for.
    #[arg(long)]
    pub user: Option<String>,
    #[command(flatten)]
    pub sgd: SgdFlags,
    /// Training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Recommendations to emit.
    #[arg(long)]
    pub top: Option<usize>,
    /// Item catalog CSV (movieId,title).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(
    args: HybridArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("hybrid", file);
    let table =
        commands::resolve_ratings(&mut resolver, args.ratings, args.format, args.rating_max)?;
    let user_key = resolver
        .optional("user", args.user)?
        .ok_or_else(|| UsageError("pass --user with the user's external id".into()))?;
    let mut sgd = commands::resolve_sgd(&mut resolver, &args.sgd)?;
    sgd.seed = resolver.value("seed", args.seed, sgd.seed)?;
    let top = resolver.value("top", args.top, 10)?;
    let catalog_path = resolver.opt_path("catalog", args.catalog);
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/hybrid")?;

    let user = table
        .user_ids
        .iter()
        .position(|id| *id == user_key)
        .ok_or_else(|| UsageError(format!("unknown user {user_key:?}")))?;
    let catalog = build_catalog(&table, catalog_path.as_deref())?;
    let model = train_bias(&table.matrix, &sgd)?;
    let (seed_item, recommendations) = recommend_hybrid(&model, &table.matrix, user, top)?;

    write_recommendations(&out.join("hybrid.csv"), &recommendations, &catalog)?;
    commands::finish_manifest(resolver, &out)?;

    println!(
        "hybrid: user {user_key} seeded on {} ({}), {} recommendations -> {}",
        catalog.external_id(seed_item),
        catalog.title(seed_item),
        recommendations.len(),
        out.display()
    );
    Ok(())
}
