use std::path::PathBuf;

use driftlane::estimation::{fit, prepare_pairs, PValueMethod};
use driftlane::optim::Convergence;
use driftlane::{Convention, DdmParams, FitResult, TrajectoryPair};
use serde::{Deserialize, Serialize};

use super::cluster::ClusterReport;
use super::ConventionArg;
use crate::config::RunConfig;
use crate::io::{read_json, write_json, InputError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Pairs JSON from `extract` or `synth`.
    #[arg(long)]
    pairs: PathBuf,
    /// Restrict the fit to the intention cluster of this clusters JSON.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Fit report JSON (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the bare fitted parameters here.
    #[arg(long)]
    params_out: Option<PathBuf>,
    /// Starting parameters JSON.
    #[arg(long)]
    p0: Option<PathBuf>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Report Student-t p-values with n - 7 degrees of freedom.
    #[arg(long)]
    student_t: bool,
}

/// One row of the parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub name: String,
    pub mean: f64,
    pub std_error: Option<f64>,
    pub t_score: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub parameters: Vec<ParameterRow>,
    pub sample_size: usize,
    pub lane_changes: usize,
    pub log_likelihood: f64,
    pub convention: Convention,
    pub convergence: Convergence,
    pub iterations: usize,
    pub evaluations: usize,
    pub p_value_method: PValueMethod,
    pub information_positive_definite: bool,
    pub params: DdmParams,
}

impl FitReport {
    pub fn new(r: &FitResult, method: PValueMethod) -> Self {
        let inf = &r.inference;
        let parameters = DdmParams::FREE_NAMES
            .iter()
            .zip(r.params.free())
            .enumerate()
            .map(|(i, (name, mean))| ParameterRow {
                name: (*name).to_string(),
                mean,
                std_error: inf.std_errors[i],
                t_score: inf.t_scores[i],
                p_value: inf.p_values[i],
            })
            .collect();
        Self {
            parameters,
            sample_size: r.n_pairs,
            lane_changes: r.n_lc,
            log_likelihood: r.log_likelihood,
            convention: r.convention,
            convergence: r.convergence,
            iterations: r.iterations,
            evaluations: r.evaluations,
            p_value_method: method,
            information_positive_definite: inf.information_positive_definite,
            params: r.params,
        }
    }
}

pub fn run(args: Args, mut cfg: RunConfig) -> anyhow::Result<()> {
    if let Some(c) = args.convention {
        cfg.convention = c.into();
    }
    if let Some(n) = args.max_iter {
        cfg.fit.bfgs.max_iter = n;
    }
    if args.student_t {
        cfg.fit.p_values = PValueMethod::StudentT;
    }
    if let Some(path) = &args.p0 {
        cfg.fit.p0 = read_json(path)?;
    }

    let mut pairs: Vec<TrajectoryPair> = read_json(&args.pairs)?;
    if let Some(path) = &args.clusters {
        let clusters: ClusterReport = read_json(path)?;
        if clusters.assignments.len() != pairs.len() {
            return Err(InputError::new(format!(
                "clusters cover {} pairs but the pairs file has {}",
                clusters.assignments.len(),
                pairs.len()
            ))
            .into());
        }
        let members = &clusters.diagnostics.intention_members;
        if clusters.diagnostics.intention_cluster.is_none() || members.is_empty() {
            return Err(InputError::new("clusters file has no intention cluster").into());
        }
        pairs = members.iter().map(|&i| pairs[i].clone()).collect();
    }
    if pairs.is_empty() {
        return Err(InputError::new("no pairs to fit").into());
    }

    let prepared = prepare_pairs(&pairs)?;
    let options = cfg.fit.options(cfg.convention);
    let result = fit(&prepared, &cfg.fit.p0, &options)?;
    if result.convergence != Convergence::Converged {
        log::warn!("optimizer stopped without converging: {:?}", result.convergence);
    }
    if let Some(path) = &args.params_out {
        write_json(Some(path), &result.params)?;
    }
    write_json(args.out.as_deref(), &FitReport::new(&result, options.p_values))
}
