//! Intention clustering of HV-car pairs.
//!
//! Each pair is reduced to a scalar feature position
//!
//! ```text
//! D = mean(G_HV) + gamma1 * std(G_HV) / T + gamma2 * (mean(a_car) - mean(a_hv))
//! ```
//!
//! and the positions are split into two clusters by an exact 1-D 2-means.
//! The weights are chosen to minimise the within-cluster sum of squares.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::numeric::{compensated_sum, mean, std_population, two_sided_normal_p};
use crate::optim::{self, BfgsOptions};
use crate::trajectory::{Outcome, TrajectoryPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures {
    pub duration: f64,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub mean_a_car: f64,
    pub mean_a_hv: f64,
}

impl PairFeatures {
    /// Features of a pair with populated steps.
    pub fn from_pair(pair: &TrajectoryPair) -> Option<Self> {
        if pair.steps.is_empty() {
            return None;
        }
        let gaps: Vec<f64> = pair.steps.iter().map(|s| s.g_hv).collect();
        let a_car: Vec<f64> = pair.steps.iter().map(|s| s.a_car).collect();
        let a_hv: Vec<f64> = pair.steps.iter().map(|s| s.a_hv).collect();
        Some(Self {
            duration: pair.duration(),
            mean_gap: mean(&gaps),
            std_gap: std_population(&gaps),
            mean_a_car: mean(&a_car),
            mean_a_hv: mean(&a_hv),
        })
    }

    /// Gap variability per second of pair duration.
    pub fn normalized_spread(&self) -> f64 {
        self.std_gap / self.duration
    }

    pub fn accel_difference(&self) -> f64 {
        self.mean_a_car - self.mean_a_hv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl FeatureWeights {
    pub const ZERO: FeatureWeights = FeatureWeights {
        gamma1: 0.0,
        gamma2: 0.0,
    };

    /// Weights reported for the TGSIM I-395 heavy-vehicle sample.
    pub const REFERENCE: FeatureWeights = FeatureWeights {
        gamma1: -23.62,
        gamma2: -4.27,
    };

    pub fn new(gamma1: f64, gamma2: f64) -> Self {
        Self { gamma1, gamma2 }
    }
}

pub fn feature_position(f: &PairFeatures, w: &FeatureWeights) -> f64 {
    f.mean_gap + w.gamma1 * f.normalized_spread() + w.gamma2 * f.accel_difference()
}

/// Exact two-cluster partition of scalar positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoMeans {
    /// Cluster label per input position: 1 (lower center) or 2.
    pub assignments: Vec<u8>,
    /// Ascending cluster centers.
    pub centers: [f64; 2],
    pub sizes: [usize; 2],
    pub within_sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub weights: FeatureWeights,
    #[serde(flatten)]
    pub partition: TwoMeans,
}

/// Recomputes the within-cluster sum of squares of a labelled partition.
pub fn partition_sse(positions: &[f64], assignments: &[u8]) -> f64 {
    (1..=2u8)
        .map(|label| {
            let members: Vec<f64> = positions
                .iter()
                .zip(assignments)
                .filter(|(_, &a)| a == label)
                .map(|(&x, _)| x)
                .collect();
            let c = mean(&members);
            compensated_sum(members.iter().map(|x| (x - c) * (x - c)))
        })
        .sum()
}

/// Globally optimal 2-means in one dimension.
///
/// Sorts the positions and scans every split point of the sorted order; ties
/// go to the smaller split (fewer points in the lower cluster).
pub fn kmeans_1d_2(positions: &[f64]) -> Result<TwoMeans> {
    if positions.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateClustering("non-finite position".into()));
    }
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| positions[i]).collect();
    let distinct = sorted.windows(2).filter(|w| w[0] != w[1]).count() + usize::from(!sorted.is_empty());
    if distinct < 2 {
        return Err(Error::DegenerateClustering(format!(
            "need at least 2 distinct values, got {distinct}"
        )));
    }

    // Center the data to limit cancellation in the prefix-sum SSE.
    let shift = mean(&sorted);
    let n = sorted.len();
    let mut sum = vec![0.0; n + 1];
    let mut sq = vec![0.0; n + 1];
    for (k, &x) in sorted.iter().enumerate() {
        let c = x - shift;
        sum[k + 1] = sum[k] + c;
        sq[k + 1] = sq[k] + c * c;
    }
    let segment = |lo: usize, hi: usize| {
        let m = (hi - lo) as f64;
        let s = sum[hi] - sum[lo];
        (sq[hi] - sq[lo] - s * s / m).max(0.0)
    };
    let mut best_split = 1;
    let mut best = f64::INFINITY;
    for split in 1..n {
        let sse = segment(0, split) + segment(split, n);
        if sse < best {
            best = sse;
            best_split = split;
        }
    }

    let mut assignments = vec![2u8; n];
    for &i in &order[..best_split] {
        assignments[i] = 1;
    }
    let centers = [mean(&sorted[..best_split]), mean(&sorted[best_split..])];
    let within_sse = partition_sse(positions, &assignments);
    Ok(TwoMeans {
        assignments,
        centers,
        sizes: [best_split, n - best_split],
        within_sse,
    })
}

/// Clusters the feature positions at fixed weights.
pub fn cluster_at(features: &[PairFeatures], w: &FeatureWeights) -> Result<ClusterResult> {
    let positions: Vec<f64> = features.iter().map(|f| feature_position(f, w)).collect();
    Ok(ClusterResult {
        weights: *w,
        partition: kmeans_1d_2(&positions)?,
    })
}

/// Within-cluster SSE as a function of the weights.
pub fn weight_objective(features: &[PairFeatures], w: &FeatureWeights) -> Result<f64> {
    cluster_at(features, w).map(|c| c.partition.within_sse)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightSearch {
    /// Values used for both weights in the multi-start grid.
    pub grid: Vec<f64>,
    pub bfgs: BfgsOptions,
}

impl Default for WeightSearch {
    fn default() -> Self {
        Self {
            grid: vec![-100.0, -50.0, 0.0, 50.0, 100.0],
            bfgs: BfgsOptions {
                max_iter: 200,
                gtol: 1e-6,
                ftol: 1e-12,
                ..BfgsOptions::default()
            },
        }
    }
}

/// Finds weights minimising the within-cluster SSE.
///
/// Runs a finite-difference BFGS from `w0` and from every point of the
/// search grid; the best local minimum wins (earliest start on ties, up to
/// a relative tolerance of 1e-12).
pub fn optimize_weights(
    features: &[PairFeatures],
    w0: FeatureWeights,
    search: &WeightSearch,
) -> Result<(FeatureWeights, ClusterResult)> {
    if features.len() < 2 {
        return Err(Error::DegenerateClustering("need at least 2 pairs".into()));
    }
    let start_value = weight_objective(features, &w0)?;
    if !start_value.is_finite() {
        return Err(Error::NonFiniteObjective {
            gamma1: w0.gamma1,
            gamma2: w0.gamma2,
        });
    }
    let objective =
        |v: &[f64]| weight_objective(features, &FeatureWeights::new(v[0], v[1])).unwrap_or(f64::INFINITY);

    let mut starts = vec![[w0.gamma1, w0.gamma2]];
    for &g1 in &search.grid {
        for &g2 in &search.grid {
            starts.push([g1, g2]);
        }
    }

    let mut best = (w0, start_value);
    for start in starts {
        let Ok(m) = optim::minimize(objective, &start, &search.bfgs) else {
            continue;
        };
        if !m.f.is_finite() {
            return Err(Error::NonFiniteObjective {
                gamma1: m.x[0],
                gamma2: m.x[1],
            });
        }
        // Only a real improvement moves away from the earlier start; flat
        // directions otherwise drift on rounding noise.
        if m.f < best.1 - 1e-12 * (1.0 + best.1.abs()) {
            best = (FeatureWeights::new(m.x[0], m.x[1]), m.f);
        }
    }
    let result = cluster_at(features, &best.0)?;
    Ok((best.0, result))
}

/// Curvature-based uncertainty of the weights. This treats the clustering
/// SSE as a least-squares criterion with four fitted quantities (two weights,
/// two centers); it is a heuristic, not a sampling-model standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightInference {
    pub heuristic: bool,
    pub std_errors: Option<[f64; 2]>,
    pub t_scores: Option<[f64; 2]>,
    pub p_values: Option<[f64; 2]>,
}

pub fn weight_inference(features: &[PairFeatures], w: &FeatureWeights) -> WeightInference {
    let none = WeightInference {
        heuristic: true,
        std_errors: None,
        t_scores: None,
        p_values: None,
    };
    let n = features.len();
    if n <= 4 {
        return none;
    }
    let objective =
        |v: &[f64]| weight_objective(features, &FeatureWeights::new(v[0], v[1])).unwrap_or(f64::NAN);
    let at = [w.gamma1, w.gamma2];
    let sse = objective(&at);
    let hessian: DMatrix<f64> = optim::central_hessian(&objective, &at, 1e-4, 1e-6);
    let Some(chol) = hessian.clone().cholesky() else {
        return none;
    };
    let inv = chol.inverse();
    let s2 = sse / (n - 4) as f64;
    let se = [(2.0 * s2 * inv[(0, 0)]).sqrt(), (2.0 * s2 * inv[(1, 1)]).sqrt()];
    if !se.iter().all(|v| v.is_finite() && *v > 0.0) {
        return none;
    }
    let t = [at[0] / se[0], at[1] / se[1]];
    WeightInference {
        heuristic: true,
        std_errors: Some(se),
        t_scores: Some(t),
        p_values: Some([two_sided_normal_p(t[0]), two_sided_normal_p(t[1])]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentionSelection {
    /// Selected cluster label (1 or 2).
    pub cluster: u8,
    /// Indices of pairs in the selected cluster.
    pub members: Vec<usize>,
    /// Lane-change pairs assigned to the other cluster.
    pub misassigned: Vec<usize>,
}

/// Picks the cluster holding most lane-change pairs. A tie goes to
/// cluster 1.
pub fn select_intention_cluster(result: &TwoMeans, outcomes: &[Outcome]) -> Result<IntentionSelection> {
    assert_eq!(result.assignments.len(), outcomes.len(), "one outcome per pair");
    let mut lc = [0usize; 2];
    for (a, o) in result.assignments.iter().zip(outcomes) {
        if o.is_lane_change() {
            lc[usize::from(*a - 1)] += 1;
        }
    }
    if lc[0] + lc[1] == 0 {
        return Err(Error::NoLaneChangePairs);
    }
    let cluster = if lc[1] > lc[0] { 2 } else { 1 };
    let members = (0..outcomes.len())
        .filter(|&i| result.assignments[i] == cluster)
        .collect();
    let misassigned: Vec<usize> = (0..outcomes.len())
        .filter(|&i| result.assignments[i] != cluster && outcomes[i].is_lane_change())
        .collect();
    for &i in &misassigned {
        log::debug!("lane-change pair {i} falls outside intention cluster {cluster}");
    }
    Ok(IntentionSelection {
        cluster,
        members,
        misassigned,
    })
}
