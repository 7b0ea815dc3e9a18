use std::path::{Path, PathBuf};

use driftlane::ddm::{decision_probability_series, drift_series};
use driftlane::{DdmParams, FirstPassageResult, TrajectoryPair};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::io::{csv_writer, num, read_json, InputError};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    pairs: PathBuf,
    /// Parameters JSON, either bare or a fit report.
    #[arg(long)]
    params: PathBuf,
    /// Per-step series CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-direction summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// Reads bare parameters or the `params` member of a fit report.
pub fn load_params(path: &Path) -> anyhow::Result<DdmParams> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(inner) = value.get_mut("params") {
        value = inner.take();
    }
    Ok(serde_json::from_value(value)?)
}

/// Step spacing of a pair must equal the model step.
fn check_step(pair: &TrajectoryPair, dt: f64) -> Result<(), InputError> {
    match pair.steps.windows(2).next() {
        Some(w) if ((w[1].t - w[0].t) - dt).abs() > 1e-6 => Err(InputError::new(format!(
            "pair {}/{} has step {} s but the parameters use dt = {dt}",
            pair.hv_id,
            pair.car_id,
            w[1].t - w[0].t
        ))),
        _ => Ok(()),
    }
}

struct Block {
    drift: Vec<f64>,
    passage: FirstPassageResult,
}

pub fn run(args: Args, cfg: RunConfig) -> anyhow::Result<()> {
    let pairs: Vec<TrajectoryPair> = read_json(&args.pairs)?;
    let p = load_params(&args.params)?;
    p.validate(cfg.fit.allow_constant_override)?;
    for pair in &pairs {
        check_step(pair, p.dt)?;
    }

    let blocks: Vec<Vec<(driftlane::Direction, Block)>> = pairs
        .par_iter()
        .map(|pair| {
            pair.lanes_available
                .iter()
                .map(|&d| {
                    let drift = drift_series(&pair.env_series(d)?, &p);
                    let passage = decision_probability_series(pair, d, &p)?;
                    Ok((d, Block { drift, passage }))
                })
                .collect::<driftlane::Result<Vec<_>>>()
        })
        .collect::<driftlane::Result<_>>()?;

    let mut series = csv_writer(args.out.as_deref())?;
    series.write_record([
        "hv_id",
        "car_id",
        "direction",
        "step",
        "t",
        "drift",
        "density",
        "cdf",
    ])?;
    for (pair, dirs) in pairs.iter().zip(&blocks) {
        for (d, b) in dirs {
            for i in 0..b.passage.len() {
                series.write_record([
                    pair.hv_id.clone(),
                    pair.car_id.clone(),
                    d.to_string(),
                    i.to_string(),
                    num(pair.steps[i].t),
                    num(b.drift[i]),
                    num(b.passage.g[i]),
                    num(b.passage.cdf[i]),
                ])?;
            }
        }
    }
    series.flush()?;

    if let Some(path) = &args.summary {
        let mut w = csv_writer(Some(path))?;
        w.write_record([
            "hv_id",
            "car_id",
            "direction",
            "outcome",
            "peak_time",
            "peak_density",
            "total_probability",
        ])?;
        for (pair, dirs) in pairs.iter().zip(&blocks) {
            let outcome = serde_json::to_value(pair.outcome)?;
            for (d, b) in dirs {
                let k = b.passage.peak_index();
                w.write_record([
                    pair.hv_id.clone(),
                    pair.car_id.clone(),
                    d.to_string(),
                    outcome.as_str().unwrap_or_default().to_string(),
                    num(pair.steps[k].t),
                    num(b.passage.g[k]),
                    num(b.passage.last_cdf()),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}
