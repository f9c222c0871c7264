//! `ingest`: normalize a raw ratings file into the canonical sparse CSV
//! plus index↔id sidecar mappings.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use crate::commands::{self, InputError};
use crate::config::Resolver;
use crate::io;

#[derive(Args, Debug, Default)]
pub struct IngestArgs {
    /// Ratings file to ingest.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Input format: sparse (CSV) or dense (numeric grid).
    #[arg(long)]
    pub format: Option<String>,
    /// Rating scale override (defaults to the observed maximum).
    #[arg(long)]
    pub rating_max: Option<f64>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(
    args: IngestArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("ingest", file);
    let table =
        commands::resolve_ratings(&mut resolver, args.ratings, args.format, args.rating_max)?;
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/ingest")?;

    io::write_ratings_csv(&out.join("ratings.csv"), &table).map_err(InputError::into_anyhow)?;
    io::write_id_map(&out.join("users.csv"), "userId", &table.user_ids)
        .map_err(InputError::into_anyhow)?;
    io::write_id_map(&out.join("items.csv"), "movieId", &table.item_ids)
        .map_err(InputError::into_anyhow)?;
    commands::finish_manifest(resolver, &out)?;

    println!(
        "ingest: {} users, {} items, {} ratings (scale {}) -> {}",
        table.matrix.num_users(),
        table.matrix.num_items(),
        table.matrix.len(),
        table.matrix.rating_max(),
        out.display()
    );
    Ok(())
}
