//! `cluster`: run the offline stage — factor the ratings, cluster the users,
//! and emit the per-cluster unified preference vectors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use banditmf_core::offline_fit;
use clap::Args;

use crate::commands::{self, SgdFlags};
use crate::config::Resolver;

#[derive(Args, Debug, Default)]
pub struct ClusterArgs {
    /// Ratings file to train on.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Input format: sparse or dense.
    #[arg(long)]
    pub format: Option<String>,
    /// Rating scale override.
    #[arg(long)]
    pub rating_max: Option<f64>,
    /// Number of user clusters.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Clustering restarts (best inertia wins).
    #[arg(long)]
    pub n_init: Option<usize>,
    #[command(flatten)]
    pub sgd: SgdFlags,
    /// Master seed for training and clustering.
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
    args: ClusterArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("cluster", file);
    let table =
        commands::resolve_ratings(&mut resolver, args.ratings, args.format, args.rating_max)?;
    let k_clusters = resolver.value("clusters", args.clusters, 3)?;
    let n_init = resolver.value("n-init", args.n_init, 20)?;
    let sgd = commands::resolve_sgd(&mut resolver, &args.sgd)?;
    let master = resolver.value("seed", args.seed, 42)?;
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/cluster")?;

    let offline = offline_fit(&table.matrix, &sgd, k_clusters, n_init, master)?;

    let mut unified = String::from("cluster,item,value\n");
    for cluster in 0..offline.num_clusters() {
        for item in 0..offline.num_items() {
            unified.push_str(&format!(
                "{cluster},{item},{}\n",
                offline.unified.get(cluster, item)
            ));
        }
    }
    std::fs::write(out.join("unified.csv"), unified)?;

    let mut assignments = String::from("user,cluster\n");
    for (user, cluster) in offline.clusters.assignment.iter().enumerate() {
        assignments.push_str(&format!("{},{cluster}\n", table.user_ids[user]));
    }
    std::fs::write(out.join("assignments.csv"), assignments)?;

    let mut inertia = String::from("iteration,inertia\n");
    for (iteration, value) in offline.clusters.inertia_trace.iter().enumerate() {
        inertia.push_str(&format!("{iteration},{value}\n"));
    }
    std::fs::write(out.join("inertia.csv"), inertia)?;
    commands::finish_manifest(resolver, &out)?;

    println!(
        "cluster: k={k_clusters} over {} users, inertia {:.6} after {} iterations -> {}",
        table.matrix.num_users(),
        offline.clusters.inertia,
        offline.clusters.inertia_trace.len(),
        out.display()
    );
    Ok(())
}
