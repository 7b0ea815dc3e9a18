use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{drift_series, initial_evidence, DdmParams, Diffusion, EnvStep};
use crate::trajectory::{Direction, TrajectoryPair};
use crate::{Error, Result};

/// First-passage distribution of one evidence process on its step grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageResult {
    /// Seconds since the first step.
    pub t_grid: Vec<f64>,
    /// First-passage density per step, 1/s.
    pub g: Vec<f64>,
    /// Cumulative first-passage probability, capped at 1.
    pub cdf: Vec<f64>,
    /// Probability mass removed by clamping negative densities to zero.
    pub clamped_mass: f64,
    /// Largest amount by which the running sum exceeded 1 before capping.
    pub overshoot: f64,
}

impl FirstPassageResult {
    /// Result for a process that starts at or above the threshold: all mass
    /// is gone before the first step.
    pub fn absorbed(n: usize, dt: f64) -> Self {
        Self {
            t_grid: (0..n).map(|i| i as f64 * dt).collect(),
            g: vec![0.0; n],
            cdf: vec![1.0; n],
            clamped_mass: 0.0,
            overshoot: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn last_density(&self) -> f64 {
        self.g.last().copied().unwrap_or(0.0)
    }

    pub fn last_cdf(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0)
    }

    /// Step index with the largest density (first one on ties).
    pub fn peak_index(&self) -> usize {
        self.g
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            )
            .0
    }
}

/// Kernel recursion for the first-passage density through a flat barrier,
/// given the drift at every step.
///
/// With `Psi(i | y, j)` the kernel from state `(y, t_j)` to the barrier at
/// `t_i`:
///
/// ```text
/// g(t_0) = 0
/// g(t_i) = -2 Psi(i | a0, 0) + 2 dt * sum_{k=1}^{i-1} g(t_k) Psi(i | threshold, k)
/// ```
///
/// `g` is a density; per-step mass is `g * dt`. Negative values are clamped to
/// zero and their mass is reported in `clamped_mass`.
pub fn first_passage_drift(a0: f64, mu: &[f64], d: &Diffusion) -> Result<FirstPassageResult> {
    if a0 >= d.threshold {
        return Err(Error::StartsAbsorbed {
            initial: a0,
            threshold: d.threshold,
        });
    }
    if !(d.sigma > 0.0 && d.dt > 0.0) {
        return Err(Error::InvalidParams(format!(
            "sigma = {}, dt = {}",
            d.sigma, d.dt
        )));
    }
    let n = mu.len();
    let dt = d.dt;
    let var_rate = d.sigma * d.sigma;

    // cum[k] = dt * (mu[0] + ... + mu[k-1])
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for &m in mu {
        cum.push(cum.last().unwrap() + dt * m);
    }

    // Per-lag constants: 1/elapsed, 1/(2 var), and the Gaussian normaliser.
    let lag_inv: Vec<f64> = (0..n).map(|l| 1.0 / (l as f64 * dt)).collect();
    let lag_half_inv_var: Vec<f64> = (0..n).map(|l| 1.0 / (2.0 * var_rate * l as f64 * dt)).collect();
    let lag_norm: Vec<f64> = (0..n)
        .map(|l| 1.0 / (2.0 * PI * var_rate * l as f64 * dt).sqrt())
        .collect();

    let mut g = vec![0.0; n];
    let mut cdf = vec![0.0; n];
    let mut clamped = 0.0;
    let mut overshoot: f64 = 0.0;
    let mut running = 0.0;
    let barrier = d.threshold;

    for i in 1..n {
        let bracket_mu = -mu[i];

        let z0 = barrier - a0 - (cum[i] - cum[0]);
        let f0 = lag_norm[i] * (-z0 * z0 * lag_half_inv_var[i]).exp();
        let mut value = -f0 * (bracket_mu - z0 * lag_inv[i]);

        let mut renewal = 0.0;
        for k in 1..i {
            let gk = g[k];
            if gk == 0.0 {
                continue;
            }
            let lag = i - k;
            let z = -(cum[i] - cum[k]);
            let f = lag_norm[lag] * (-z * z * lag_half_inv_var[lag]).exp();
            renewal += gk * 0.5 * f * (bracket_mu - z * lag_inv[lag]);
        }
        value += 2.0 * dt * renewal;

        if value < 0.0 || !value.is_finite() {
            if value.is_finite() {
                clamped += -value * dt;
            }
            value = 0.0;
        }
        g[i] = value;
        running += value * dt;
        if running > 1.0 {
            overshoot = overshoot.max(running - 1.0);
        }
        cdf[i] = running.min(1.0);
    }

    Ok(FirstPassageResult {
        t_grid: (0..n).map(|i| i as f64 * dt).collect(),
        g,
        cdf,
        clamped_mass: clamped,
        overshoot,
    })
}

/// First-passage distribution for an environment series under `p`.
pub fn first_passage(a0: f64, env: &[EnvStep], p: &DdmParams) -> Result<FirstPassageResult> {
    if env.is_empty() {
        return Err(Error::InvalidParams("empty environment series".into()));
    }
    first_passage_drift(a0, &drift_series(env, p), &p.process())
}

/// Distribution of the decision time toward `direction` for one pair. A
/// start at or above the threshold yields [`FirstPassageResult::absorbed`].
pub fn decision_probability_series(
    pair: &TrajectoryPair,
    direction: Direction,
    p: &DdmParams,
) -> Result<FirstPassageResult> {
    let env = pair.env_series(direction)?;
    let h0 = pair
        .initial_headway()
        .ok_or_else(|| Error::InvalidParams("pair has no steps".into()))?;
    let a0 = initial_evidence(h0, p);
    if a0 >= p.threshold {
        return Ok(FirstPassageResult::absorbed(env.len(), p.dt));
    }
    first_passage(a0, &env, p)
}

/// Zero-order-hold refinement of a drift series onto a grid `factor` times
/// finer. The result has `(n - 1) * factor + 1` points.
pub fn refine_drift(mu: &[f64], factor: usize) -> Vec<f64> {
    assert!(factor >= 1);
    if mu.is_empty() {
        return Vec::new();
    }
    let n = (mu.len() - 1) * factor + 1;
    (0..n).map(|r| mu[r / factor]).collect()
}
