use std::path::PathBuf;

use driftlane::simulate::generate_synthetic_pairs;
use driftlane::DdmParams;

use super::predict::load_params;
use crate::config::RunConfig;
use crate::io::write_json;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// True parameters (bare or fit report); defaults to the reference values.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    n_pairs: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Pairs JSON output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, cfg: RunConfig) -> anyhow::Result<()> {
    let truth = match &args.params {
        Some(p) => load_params(p)?,
        None => DdmParams::reference(),
    };
    let data = generate_synthetic_pairs(&truth, args.n_pairs, &cfg.scenario, args.seed.unwrap_or(cfg.seed))?;
    log::info!(
        "{} pairs, {} lane changes, {} ties",
        data.pairs.len(),
        data.pairs.iter().filter(|p| p.outcome.is_lane_change()).count(),
        data.ties
    );
    write_json(args.out.as_deref(), &data.pairs)
}
