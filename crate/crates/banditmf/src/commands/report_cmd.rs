//! `report`: render a metric CSV as a fixed-width text table.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use crate::commands::{self, InputError};
use crate::config::Resolver;
use crate::report;

#[derive(Args, Debug, Default)]
pub struct ReportArgs {
    /// Metric CSV to render.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(
    args: ReportArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("report", file);
    let input = resolver.require_path("input", args.input)?;
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/report")?;

    let table = report::render_csv_file(&input).map_err(InputError::into_anyhow)?;
    std::fs::write(out.join("report.txt"), &table)?;
    commands::finish_manifest(resolver, &out)?;

    print!("{table}");
    println!("report: {} lines -> {}", table.lines().count(), out.display());
    Ok(())
}
