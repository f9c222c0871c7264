use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use banditmf::commands::{
    cluster, eval_mf, hybrid, ingest, recommend, replay_linucb, report_cmd, simulate, train_mf,
    InputError,
};
use banditmf::config::{self, ConfigError};
use banditmf::io::IoError;
use banditmf::model_io::ModelIoError;
use banditmf::report::ReportError;
use banditmf::UsageError;
use clap::{CommandFactory, Parser, Subcommand};

/// Recommender and bandit experiments with seeded, replayable runs.
#[derive(Parser, Debug)]
#[command(name = "banditmf", version, about)]
struct Cli {
    /// Re-run a recorded experiment from its manifest.txt.
    #[arg(long, value_name = "PATH", global = false)]
    from_manifest: Option<PathBuf>,
    /// Output directory override for --from-manifest runs.
    #[arg(long, value_name = "DIR", requires = "from_manifest")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize a ratings file into the canonical CSV plus id mappings.
    Ingest(ingest::IngestArgs),
    /// Train a factor model and save it with its metrics.
    TrainMf(train_mf::TrainMfArgs),
    /// Compare base and bias variants on seeded holdout splits.
    EvalMf(eval_mf::EvalMfArgs),
    /// Recommend from an ad-hoc rating profile via user neighborhoods.
    Recommend(recommend::RecommendArgs),
    /// Recommend for a known user via factor-seeded item similarity.
    Hybrid(hybrid::HybridArgs),
    /// Fit the offline model: factors, user clusters, unified vectors.
    Cluster(cluster::ClusterArgs),
    /// Replay a logged stream through a contextual policy.
    ReplayLinucb(replay_linucb::ReplayLinucbArgs),
    /// Run the cold-start bandit experiment end to end.
    SimulateBanditmf(simulate::SimulateArgs),
    /// Render a metric CSV as a text table.
    Report(report_cmd::ReportArgs),
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    if let Some(manifest_path) = cli.from_manifest {
        if cli.command.is_some() {
            return Err(UsageError(
                "--from-manifest replaces the subcommand; pass one or the other".into(),
            )
            .into());
        }
        let map = config::load_config(Some(&manifest_path)).map_err(InputError::into_anyhow)?;
        return rerun(map, cli.out);
    }
    match cli.command {
        Some(Command::Ingest(args)) => ingest::run(args, None, None),
        Some(Command::TrainMf(args)) => train_mf::run(args, None, None),
        Some(Command::EvalMf(args)) => eval_mf::run(args, None, None),
        Some(Command::Recommend(args)) => recommend::run(args, None, None),
        Some(Command::Hybrid(args)) => hybrid::run(args, None, None),
        Some(Command::Cluster(args)) => cluster::run(args, None, None),
        Some(Command::ReplayLinucb(args)) => replay_linucb::run(args, None, None),
        Some(Command::SimulateBanditmf(args)) => simulate::run(args, None, None),
        Some(Command::Report(args)) => report_cmd::run(args, None, None),
        None => {
            Cli::command().print_help()?;
            Err(UsageError("pass a subcommand or --from-manifest".into()).into())
        }
    }
}

/// Re-resolves a recorded run: the manifest becomes the config map and no
/// flags are set, so every parameter resolves exactly as recorded.
fn rerun(map: BTreeMap<String, String>, out: Option<PathBuf>) -> anyhow::Result<()> {
    let supplied = Some(map.clone());
    let command = map
        .get("command")
        .ok_or_else(|| UsageError("manifest has no command key".into()))?
        .clone();
    match command.as_str() {
        "ingest" => ingest::run(Default::default(), supplied, out),
        "train-mf" => train_mf::run(Default::default(), supplied, out),
        "eval-mf" => eval_mf::run(Default::default(), supplied, out),
        "recommend" => recommend::run(Default::default(), supplied, out),
        "hybrid" => hybrid::run(Default::default(), supplied, out),
        "cluster" => cluster::run(Default::default(), supplied, out),
        "replay-linucb" => replay_linucb::run(Default::default(), supplied, out),
        "simulate-banditmf" => simulate::run(Default::default(), supplied, out),
        "report" => report_cmd::run(Default::default(), supplied, out),
        other => Err(UsageError(format!("manifest names unknown command {other:?}")).into()),
    }
}

/// Usage problems (bad flags, missing inputs) exit 2; computation failures
/// exit 1.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<IoError>().is_some_and(IoError::is_missing)
            || cause.downcast_ref::<ModelIoError>().is_some_and(ModelIoError::is_missing)
            || cause.downcast_ref::<ConfigError>().is_some_and(ConfigError::is_missing)
            || cause.downcast_ref::<ReportError>().is_some_and(ReportError::is_missing)
        {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            for cause in err.chain().skip(1) {
                eprintln!("  caused by: {cause}");
            }
            let code = classify(&err);
            if code == 2 {
                eprintln!("run `banditmf --help` for usage");
            }
            ExitCode::from(code)
        }
    }
}
