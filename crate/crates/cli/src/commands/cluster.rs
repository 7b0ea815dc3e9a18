use std::path::PathBuf;

use driftlane::cluster::{
    cluster_at, optimize_weights, select_intention_cluster, weight_inference, weight_objective,
    WeightInference,
};
use driftlane::{FeatureWeights, PairFeatures, TrajectoryPair};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::io::{read_json, write_json, InputError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Pairs JSON from `extract`.
    #[arg(long)]
    pairs: PathBuf,
    /// Clusters JSON output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Starting weights `gamma1,gamma2`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    start: Option<Vec<f64>>,
    /// Cluster at the starting weights without optimising them.
    #[arg(long)]
    fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Within-cluster SSE at zero weights.
    pub baseline_sse: f64,
    pub lane_changes_per_cluster: [usize; 2],
    /// Cluster holding most lane-change pairs, if any pair changed lanes.
    pub intention_cluster: Option<u8>,
    pub intention_members: Vec<usize>,
    /// Lane-change pairs outside the intention cluster.
    pub misassigned: Vec<usize>,
    pub weight_inference: WeightInference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub weights: FeatureWeights,
    pub centers: [f64; 2],
    pub sizes: [usize; 2],
    pub within_sse: f64,
    /// Cluster label (1 or 2) per pair, in pairs-file order.
    pub assignments: Vec<u8>,
    pub diagnostics: Diagnostics,
}

pub fn run(args: Args, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(s) = args.start {
        cfg.cluster.start = FeatureWeights::new(s[0], s[1]);
    }
    let pairs: Vec<TrajectoryPair> = read_json(&args.pairs)?;
    let features = pairs
        .iter()
        .map(|p| {
            PairFeatures::from_pair(p)
                .ok_or_else(|| InputError::new(format!("pair {}/{} has no steps", p.hv_id, p.car_id)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let result = if args.fixed {
        cluster_at(&features, &cfg.cluster.start)?
    } else {
        optimize_weights(&features, cfg.cluster.start, &cfg.cluster.search)?.1
    };
    let partition = &result.partition;

    let mut lc = [0usize; 2];
    for (p, &a) in pairs.iter().zip(&partition.assignments) {
        if p.outcome.is_lane_change() {
            lc[usize::from(a - 1)] += 1;
        }
    }
    let outcomes: Vec<_> = pairs.iter().map(|p| p.outcome).collect();
    let selection = match select_intention_cluster(partition, &outcomes) {
        Ok(s) => Some(s),
        Err(driftlane::Error::NoLaneChangePairs) => {
            log::warn!("no lane-change pairs; intention cluster undefined");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let report = ClusterReport {
        weights: result.weights,
        centers: partition.centers,
        sizes: partition.sizes,
        within_sse: partition.within_sse,
        assignments: partition.assignments.clone(),
        diagnostics: Diagnostics {
            baseline_sse: weight_objective(&features, &FeatureWeights::ZERO)?,
            lane_changes_per_cluster: lc,
            intention_cluster: selection.as_ref().map(|s| s.cluster),
            intention_members: selection.as_ref().map(|s| s.members.clone()).unwrap_or_default(),
            misassigned: selection.map(|s| s.misassigned).unwrap_or_default(),
            weight_inference: weight_inference(&features, &result.weights),
        },
    };
    write_json(args.out.as_deref(), &report)
}
