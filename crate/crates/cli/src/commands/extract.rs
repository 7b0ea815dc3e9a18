use std::path::PathBuf;

use driftlane::trajectory::{extract_pairs, parse_trajectories_path};

use super::OrientationArg;
use crate::config::RunConfig;
use crate::io::{write_json, InputError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Trajectory CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Pairs JSON output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lanes in which the following car may be observed.
    #[arg(long, value_delimiter = ',')]
    lanes: Option<Vec<i32>>,
    /// Minimum pair duration in seconds.
    #[arg(long)]
    min_duration: Option<f64>,
    #[arg(long, value_enum)]
    orientation: Option<OrientationArg>,
}

pub fn run(args: Args, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(lanes) = args.lanes {
        cfg.extract.lanes = lanes;
    }
    if let Some(d) = args.min_duration {
        cfg.extract.min_duration = d;
    }
    if let Some(o) = args.orientation {
        cfg.extract.orientation = o.into();
    }
    let input = args
        .input
        .or(cfg.input)
        .ok_or_else(|| InputError::new("no input trajectory file (use --input or `input` in the config)"))?;

    let set = parse_trajectories_path(&input, &cfg.schema)?;
    let pairs = extract_pairs(&set, &cfg.extract)?;
    log::info!("{} tracks, {} pairs", set.tracks.len(), pairs.len());
    write_json(args.out.as_deref(), &pairs)
}
