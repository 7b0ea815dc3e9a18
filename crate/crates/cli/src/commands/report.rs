use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use super::cluster::ClusterReport;
use super::fit::FitReport;
use crate::io::{read_json, write_json, writer, InputError};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Text report (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the combined report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Serialize)]
struct Combined<'a> {
    fit: Option<&'a FitReport>,
    clusters: Option<&'a ClusterReport>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

pub fn render_fit(fit: &FitReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>12} {:>12} {:>10} {:>10}",
        "Parameter", "Mean", "Std. error", "t-score", "p-value"
    );
    for row in &fit.parameters {
        let _ = writeln!(
            s,
            "{:<10} {:>12.4} {:>12} {:>10} {:>10}",
            row.name,
            row.mean,
            cell(row.std_error),
            cell(row.t_score),
            cell(row.p_value)
        );
    }
    let _ = writeln!(s, "Sample size      {}", fit.sample_size);
    let _ = writeln!(s, "Lane changes     {}", fit.lane_changes);
    let _ = writeln!(s, "Log-likelihood   {:.4}", fit.log_likelihood);
    let _ = writeln!(
        s,
        "Convention       {}",
        serde_json::to_value(fit.convention)
            .unwrap_or_default()
            .as_str()
            .unwrap_or("")
    );
    let _ = writeln!(
        s,
        "Convergence      {:?} after {} iterations",
        fit.convergence, fit.iterations
    );
    if !fit.information_positive_definite {
        let _ = writeln!(s, "Warning: observed information not positive definite");
    }
    s
}

pub fn render_clusters(c: &ClusterReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Weights gamma1 = {:.4}, gamma2 = {:.4}",
        c.weights.gamma1, c.weights.gamma2
    );
    let _ = writeln!(
        s,
        "Within-cluster SSE {:.4} (unweighted {:.4})",
        c.within_sse, c.diagnostics.baseline_sse
    );
    let _ = writeln!(
        s,
        "{:<8} {:>12} {:>6} {:>13}",
        "Cluster", "Center", "Size", "Lane changes"
    );
    for k in 0..2 {
        let _ = writeln!(
            s,
            "{:<8} {:>12.4} {:>6} {:>13}",
            k + 1,
            c.centers[k],
            c.sizes[k],
            c.diagnostics.lane_changes_per_cluster[k]
        );
    }
    match c.diagnostics.intention_cluster {
        Some(k) => {
            let _ = writeln!(s, "Intention cluster {k}");
        }
        None => {
            let _ = writeln!(s, "Intention cluster undefined (no lane changes)");
        }
    }
    let _ = writeln!(s, "{} misassigned", c.diagnostics.misassigned.len());
    s
}

pub fn run(args: Args) -> anyhow::Result<()> {
    if args.fit.is_none() && args.clusters.is_none() {
        return Err(InputError::new("nothing to report: pass --fit and/or --clusters").into());
    }
    let fit: Option<FitReport> = args.fit.as_deref().map(read_json).transpose()?;
    let clusters: Option<ClusterReport> = args.clusters.as_deref().map(read_json).transpose()?;

    let mut text = String::new();
    if let Some(f) = &fit {
        text.push_str(&render_fit(f));
    }
    if let Some(c) = &clusters {
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&render_clusters(c));
    }
    let mut w = writer(args.out.as_deref())?;
    w.write_all(text.as_bytes())?;
    w.flush()?;

    if let Some(path) = &args.json {
        write_json(
            Some(path),
            &Combined {
                fit: fit.as_ref(),
                clusters: clusters.as_ref(),
            },
        )?;
    }
    Ok(())
}
