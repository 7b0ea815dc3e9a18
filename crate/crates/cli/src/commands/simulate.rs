use std::path::PathBuf;

use clap::ValueEnum;
use driftlane::ddm::{first_passage_drift, initial_evidence};
use driftlane::simulate::{simulate_paths, CrossingRule, DriftInput, SimConfig};
use driftlane::{DdmParams, Direction, TrajectoryPair};
use serde::Serialize;

use super::predict::load_params;
use crate::config::RunConfig;
use crate::io::{csv_writer, num, read_json, write_json, InputError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CrossingArg {
    Bridge,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Left,
    Right,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Parameters JSON (bare or fit report); defaults to the reference values.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated time span in seconds.
    #[arg(long)]
    horizon: Option<f64>,
    /// Passage times CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON with checkpoint CDF values.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Constant drift.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["drift_series", "pairs"])]
    drift: Option<f64>,
    /// JSON array of drift values per step; the last value is held.
    #[arg(long, conflicts_with = "pairs")]
    drift_series: Option<PathBuf>,
    /// Take the drift and initial evidence from a pair of this file.
    #[arg(long, requires = "direction")]
    pairs: Option<PathBuf>,
    /// Index of the pair in `--pairs`.
    #[arg(long, default_value_t = 0)]
    pair: usize,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Initial evidence (ignored with `--pairs`).
    #[arg(long, allow_negative_numbers = true)]
    a0: Option<f64>,
    #[arg(long, value_enum)]
    crossing: Option<CrossingArg>,
}

#[derive(Serialize)]
struct Checkpoint {
    t: f64,
    monte_carlo_cdf: f64,
    binomial_std_error: f64,
    recursion_cdf: f64,
}

#[derive(Serialize)]
struct Summary {
    n_paths: usize,
    seed: u64,
    dt: f64,
    horizon: f64,
    a0: f64,
    crossing: CrossingRule,
    passed: usize,
    checkpoints: Vec<Checkpoint>,
}

pub fn run(args: Args, cfg: RunConfig) -> anyhow::Result<()> {
    let params = match &args.params {
        Some(path) => load_params(path)?,
        None => DdmParams::reference(),
    };
    params.validate(cfg.fit.allow_constant_override)?;
    let sim_cfg = SimConfig {
        n_paths: args.n_paths.unwrap_or(cfg.simulate.n_paths),
        seed: args.seed.unwrap_or(cfg.seed),
        dt: params.dt,
        horizon: args.horizon.unwrap_or(cfg.simulate.horizon),
        params,
        crossing: match args.crossing {
            Some(CrossingArg::Bridge) => CrossingRule::Bridge,
            Some(CrossingArg::Grid) => CrossingRule::Grid,
            None => cfg.simulate.crossing,
        },
    };
    let n_steps = sim_cfg.steps()?;

    let series: Vec<f64>;
    let (a0, drift) = if let Some(path) = &args.pairs {
        let pairs: Vec<TrajectoryPair> = read_json(path)?;
        let pair = pairs.get(args.pair).ok_or_else(|| {
            InputError::new(format!(
                "pair index {} out of range ({} pairs)",
                args.pair,
                pairs.len()
            ))
        })?;
        let direction = match args.direction {
            Some(DirectionArg::Left) => Direction::Left,
            _ => Direction::Right,
        };
        let env = pair.env_series(direction)?;
        series = driftlane::ddm::drift_series(&env, &params);
        let h0 = pair
            .initial_headway()
            .ok_or_else(|| InputError::new("pair has no steps"))?;
        (initial_evidence(h0, &params), DriftInput::Series(&series))
    } else if let Some(path) = &args.drift_series {
        series = read_json(path)?;
        (
            args.a0.unwrap_or(params.evidence_base),
            DriftInput::Series(&series),
        )
    } else {
        (
            args.a0.unwrap_or(params.evidence_base),
            DriftInput::Constant(args.drift.unwrap_or(0.0)),
        )
    };

    let sample = simulate_paths(a0, drift, &sim_cfg)?;

    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["path", "passage_step", "passage_time"])?;
    for (k, step) in sample.passage_step.iter().enumerate() {
        let (step, t) = match step {
            Some(s) => (s.to_string(), num(*s as f64 * sample.dt)),
            None => (String::new(), String::new()),
        };
        w.write_record([k.to_string(), step, t])?;
    }
    w.flush()?;

    if let Some(path) = &args.summary {
        let mu: Vec<f64> = match drift {
            DriftInput::Constant(c) => vec![c; n_steps + 1],
            DriftInput::Series(s) => (0..=n_steps)
                .map(|i| s[i.min(s.len().saturating_sub(1))])
                .collect(),
            DriftInput::Env(_) => unreachable!("the CLI passes drift values"),
        };
        let recursion = if mu.is_empty() || a0 >= params.threshold {
            None
        } else {
            Some(first_passage_drift(a0, &mu, &params.process())?)
        };
        let every = cfg.simulate.checkpoint_every;
        if !(every > 0.0) {
            return Err(InputError::new("simulate.checkpoint_every must be positive").into());
        }
        let n = sample.n_paths() as f64;
        let checkpoints = (1..)
            .map(|k| k as f64 * every)
            .take_while(|t| *t <= sim_cfg.horizon + 1e-9)
            .map(|t| {
                let f = sample.cdf_at(t);
                let i = ((t / params.dt) + 1e-9).floor() as usize;
                Checkpoint {
                    t,
                    monte_carlo_cdf: f,
                    binomial_std_error: (f * (1.0 - f) / n).sqrt(),
                    recursion_cdf: recursion.as_ref().map_or(1.0, |r| r.cdf[i.min(r.cdf.len() - 1)]),
                }
            })
            .collect();
        let summary = Summary {
            n_paths: sample.n_paths(),
            seed: sim_cfg.seed,
            dt: params.dt,
            horizon: sim_cfg.horizon,
            a0,
            crossing: sim_cfg.crossing,
            passed: sample.passage_step.iter().flatten().count(),
            checkpoints,
        };
        write_json(Some(path), &summary)?;
    }
    Ok(())
}
