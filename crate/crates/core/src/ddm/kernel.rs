//! Transition density and kernel of the evidence process on a uniform grid.
//!
//! Times are grid indices: step `i` sits at `t_i = i * dt`. A drift value
//! `mu[k]` holds over `[t_k, t_{k+1})`, so the drift accumulated between
//! steps `j < i` is `dt * (mu[j] + ... + mu[i-1])`. This is the same
//! left-point rule the Euler update of the simulator uses.

use std::f64::consts::PI;

use super::Diffusion;
use crate::{Error, Result};

/// `dt * sum(mu[j..=i])`, both endpoints included.
pub fn drift_integral(mu: &[f64], j: usize, i: usize, dt: f64) -> Result<f64> {
    if i >= mu.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: mu.len(),
        });
    }
    if j > i {
        return Err(Error::IndexOutOfRange { index: j, len: i + 1 });
    }
    Ok(dt * mu[j..=i].iter().sum::<f64>())
}

/// Drift accumulated from step `j` to step `i` (`j <= i`).
pub fn elapsed_drift(mu: &[f64], j: usize, i: usize, dt: f64) -> Result<f64> {
    if i >= mu.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: mu.len(),
        });
    }
    match i.checked_sub(j) {
        None => Err(Error::NonPositiveElapsed { from: j, to: i }),
        Some(0) => Ok(0.0),
        Some(_) => drift_integral(mu, j, i - 1, dt),
    }
}

#[inline]
pub(crate) fn gaussian(displacement: f64, variance: f64) -> f64 {
    (-displacement * displacement / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

/// Density of moving from evidence `y` at step `j` to `x` at step `i`.
pub fn transition_density(x: f64, i: usize, y: f64, j: usize, mu: &[f64], d: &Diffusion) -> Result<f64> {
    if i <= j {
        return Err(Error::NonPositiveElapsed { from: j, to: i });
    }
    let elapsed = (i - j) as f64 * d.dt;
    let drift = elapsed_drift(mu, j, i, d.dt)?;
    Ok(gaussian(x - y - drift, d.sigma * d.sigma * elapsed))
}

/// Kernel of the first-passage integral equation for a constant barrier at
/// `threshold`, from state (`y`, step `j`) to the barrier at step `i`.
pub fn kernel(threshold: f64, i: usize, y: f64, j: usize, mu: &[f64], d: &Diffusion) -> Result<f64> {
    let f = transition_density(threshold, i, y, j, mu, d)?;
    let elapsed = (i - j) as f64 * d.dt;
    let drift = elapsed_drift(mu, j, i, d.dt)?;
    // The barrier is flat, so its slope term vanishes.
    Ok(0.5 * f * (-mu[i] - (threshold - y - drift) / elapsed))
}
