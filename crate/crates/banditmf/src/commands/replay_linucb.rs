//! `replay-linucb`: evaluate a contextual policy against a logged
//! interaction stream with rejection-sampling replay, reporting the running
//! click-through rate and per-arm prediction counts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use banditmf_core::seed::{derive_seed, rng_from_seed};
use banditmf_core::{replay_ctr, AlphaSchedule, LinUcbState, ReplayPolicy};
use clap::Args;
use rand_chacha::ChaCha8Rng;

use crate::commands::{self, InputError};
use crate::config::Resolver;
use crate::io;
use crate::UsageError;

#[derive(Args, Debug, Default)]
pub struct ReplayLinucbArgs {
    /// Logged interaction file (action, reward, features per line).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Exploration width: `const:C`, `inv-sqrt-t`, or `adaptive:C,S`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Number of arms (defaults to the highest logged action + 1).
    #[arg(long)]
    pub arms: Option<usize>,
    /// Seed for the replay's tie-break randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses an exploration-width schedule spelled as `const:C`,
/// `inv-sqrt-t`, or `adaptive:C,S`.
pub fn parse_alpha(text: &str) -> Result<AlphaSchedule, UsageError> {
    let bad = || UsageError(format!("bad --alpha {text:?}; expected const:C, inv-sqrt-t, or adaptive:C,S"));
    let schedule = if text == "inv-sqrt-t" {
        AlphaSchedule::InverseSqrtT
    } else if let Some(rest) = text.strip_prefix("const:") {
        AlphaSchedule::Constant(rest.trim().parse().map_err(|_| bad())?)
    } else if let Some(rest) = text.strip_prefix("adaptive:") {
        let (numerator, scale) = rest.split_once(',').ok_or_else(bad)?;
        AlphaSchedule::AdaptiveCorrect {
            numerator: numerator.trim().parse().map_err(|_| bad())?,
            scale: scale.trim().parse().map_err(|_| bad())?,
        }
    } else {
        return Err(bad());
    };
    schedule.validate().map_err(|e| UsageError(format!("bad --alpha {text:?}: {e}")))?;
    Ok(schedule)
}

/// Delegating policy wrapper that records, per log row, whether the row
/// matched and what it paid, plus per-arm prediction/correct counts —
/// enough to rebuild the running totals the CSV reports.
struct Counting<'a> {
    inner: &'a mut LinUcbState,
    predictions: Vec<u64>,
    correct: Vec<u64>,
    /// One `(matched, reward)` entry per choose() call.
    events: Vec<(bool, f64)>,
}

impl<'a> Counting<'a> {
    fn new(inner: &'a mut LinUcbState) -> Self {
        let arms = inner.num_arms();
        Counting { inner, predictions: vec![0; arms], correct: vec![0; arms], events: Vec::new() }
    }
}

impl ReplayPolicy for Counting<'_> {
    fn choose(&mut self, context: &[f64], t: u64, rng: &mut ChaCha8Rng) -> usize {
        let pick = self.inner.choose(context, t, rng);
        self.predictions[pick] += 1;
        self.events.push((false, 0.0));
        pick
    }

    fn learn(&mut self, arm: usize, context: &[f64], reward: f64) {
        self.inner.learn(arm, context, reward);
        if reward == 1.0 {
            self.correct[arm] += 1;
        }
        let last = self.events.last_mut().expect("learn follows a choose");
        *last = (true, reward);
    }
}

pub fn run(
    args: ReplayLinucbArgs,
    supplied: Option<BTreeMap<String, String>>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<()> {
    let file = commands::effective_config(supplied, args.config.as_deref())?;
    let mut resolver = Resolver::new("replay-linucb", file);
    let log_path = resolver.require_path("log", args.log)?;
    let alpha_text = resolver.value("alpha", args.alpha, "adaptive:0.001,0.1".to_string())?;
    let arms_flag = resolver.optional("arms", args.arms)?;
    let seed = resolver.value("seed", args.seed, 42)?;
    let out = commands::prepare_out(&mut resolver, args.out, out_override, "out/replay-linucb")?;

    let log = io::load_replay_log(&log_path).map_err(InputError::into_anyhow)?;
    let alpha = parse_alpha(&alpha_text)?;
    let arms = match arms_flag {
        Some(k) => k,
        None => log
            .max_action()
            .map(|a| a + 1)
            .ok_or_else(|| UsageError("empty log; pass --arms explicitly".into()))?,
    };
    if let Some(max) = log.max_action() {
        if max >= arms {
            return Err(
                UsageError(format!("log contains action {max} but --arms is {arms}")).into()
            );
        }
    }
    if log.dim() == 0 {
        return Err(UsageError("log rows carry no features".into()).into());
    }

    let mut state = LinUcbState::new(arms, log.dim(), alpha)?;
    let mut policy = Counting::new(&mut state);
    let mut rng = rng_from_seed(derive_seed(seed, "replay"));
    let (series, matches, correct) = replay_ctr(&log, &mut policy, &mut rng);

    let mut ctr_csv = String::from("round,matches,correct,ctr\n");
    let mut running_matches = 0u64;
    let mut running_correct = 0u64;
    for (row, (matched, reward)) in policy.events.iter().enumerate() {
        if *matched {
            running_matches += 1;
            if *reward == 1.0 {
                running_correct += 1;
            }
        }
        ctr_csv.push_str(&format!(
            "{},{running_matches},{running_correct},{}\n",
            row + 1,
            series[row]
        ));
    }
    debug_assert_eq!(running_matches, matches);
    debug_assert_eq!(running_correct, correct);
    std::fs::write(out.join("ctr.csv"), ctr_csv)?;

    let mut arms_csv = String::from("arm,predictions,correct\n");
    for arm in 0..arms {
        arms_csv.push_str(&format!(
            "{arm},{},{}\n",
            policy.predictions[arm], policy.correct[arm]
        ));
    }
    std::fs::write(out.join("arms.csv"), arms_csv)?;
    commands::finish_manifest(resolver, &out)?;

    let ctr = series.last().copied().unwrap_or(f64::NAN);
    println!(
        "replay-linucb: {matches} matched of {} rows, {correct} correct, CTR {ctr} -> {}",
        log.len(),
        out.display()
    );
    Ok(())
}
