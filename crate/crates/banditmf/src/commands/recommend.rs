//! `recommend`: neighborhood recommendations for an ad-hoc rating profile
//! given on the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use banditmf_core::{recommend_user_based, ItemCatalog, Recommendation, TargetUserInput};
use clap::Args;

use crate::commands::{self, InputError};
use crate::config::Resolver;
use crate::io::{self, RatingsTable};
use crate::UsageError;

#[derive(Args, Debug, Default)]
pub struct RecommendArgs {
    /// Ratings file the neighborhood is drawn from.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Input format: sparse or dense.
    #[arg(long)]
    pub format: Option<String>,
    /// Rating scale override.
    #[arg(long)]
    pub rating_max: Option<f64>,
    /// A rating of the target user as ITEM=VALUE; repeatable. ITEM is an
    /// external id, or a title when a catalog is given.
    #[arg(long = "rate", value_name = "ITEM=VALUE")]
    pub rate: Vec<String>,
    /// Recommendations to emit.
    #[arg(long)]
    pub top: Option<usize>,
    /// Similar users drawn per rated item.
    #[arg(long)]
    pub groups: Option<usize>,
    /// Item catalog CSV (movieId,title) for titles and title lookups.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Builds the catalog for the matrix's items, titled from the catalog file
/// when one is given (items without a catalog entry keep their id as title).
pub(crate) fn build_catalog(
    table: &RatingsTable,
    catalog_path: Option<&Path>,
) -> anyhow::Result<ItemCatalog> {
    let titles: Vec<String> = match catalog_path {
        None => table.item_ids.clone(),
        Some(path) => {
            let pairs = io::load_catalog_csv(path).map_err(InputError::into_anyhow)?;
            let by_id: BTreeMap<&str, &str> =
                pairs.iter().map(|(id, title)| (id.as_str(), title.as_str())).collect();
            table
                .item_ids
                .iter()
                .map(|id| by_id.get(id.as_str()).unwrap_or(&id.as_str()).to_string())
                .collect()
        }
    };
    Ok(ItemCatalog::new(table.item_ids.clone(), titles)?)
}

/// Parses repeatable `ITEM=VALUE` ratings, splitting on the last `=` so
/// item keys may themselves contain one.
pub(crate) fn parse_rate_flags(raw: &[String]) -> Result<TargetUserInput, UsageError> {
    if raw.is_empty() {
        return Err(UsageError("pass at least one --rate ITEM=VALUE".into()));
    }
    let mut ratings = Vec::with_capacity(raw.len());
    for entry in raw {
        let Some((key, value)) = entry.rsplit_once('=') else {
            return Err(UsageError(format!("--rate {entry:?} is not ITEM=VALUE")));
        };
        let rating: f64 = value
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("--rate {entry:?}: unparseable value {value:?}")))?;
        ratings.push((key.trim().to_string(), rating));
    }
    Ok(TargetUserInput::new(ratings))
}

/// Writes recommendations as `rank,item_external_id,title,score`.
pub(crate) fn write_recommendations(
    path: &Path,
    recommendations: &[Recommendation],
    catalog: &ItemCatalog,
) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["rank", "item_external_id", "title", "score"])?;
    for rec in recommendations {
        writer.write_record([
            &rec.rank.to_string(),
            catalog.external_id(rec.item),
            catalog.title(rec.item),
            &rec.score.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn run(
    args: RecommendArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("recommend", file);
    let table =
        commands::resolve_ratings(&mut resolver, args.ratings, args.format, args.rating_max)?;
    let rate_entries = resolver.list("rate", &args.rate);
    let top = resolver.value("top", args.top, 10)?;
    let groups = resolver.value("groups", args.groups, 5)?;
    let catalog_path = resolver.opt_path("catalog", args.catalog);
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/recommend")?;

    let catalog = build_catalog(&table, catalog_path.as_deref())?;
    let input = parse_rate_flags(&rate_entries)?;
    let target = input
        .resolve(&catalog, table.matrix.rating_max())
        .map_err(|e| UsageError(e.to_string()))?;
    let recommendations = recommend_user_based(&table.matrix, &target, top, groups)?;

    write_recommendations(&out.join("recommendations.csv"), &recommendations, &catalog)?;
    commands::finish_manifest(resolver, &out)?;

    println!(
        "recommend: {} items for a {}-rating profile -> {}",
        recommendations.len(),
        target.len(),
        out.display()
    );
    Ok(())
}
