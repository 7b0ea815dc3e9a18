//! Drift-diffusion evidence model.
//!
//! Evidence starts at `A(t0) = base - alpha * h0` (time headway `h0`) and
//! evolves as `dA = mu(X(t)) dt + sigma dW` until it first reaches the
//! constant threshold. The drift is
//!
//! ```text
//! mu = beta0 + beta1 atan(G_F - G_F0) + beta2 atan(V_adj - V_HV) + beta3 delta_G
//! ```
//!
//! First-passage densities through the threshold are computed by the
//! kernel recursion in [`passage`].

mod kernel;
mod passage;

pub use kernel::{drift_integral, elapsed_drift, kernel, transition_density};
pub use passage::{
    decision_probability_series, first_passage, first_passage_drift, refine_drift, FirstPassageResult,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const THRESHOLD: f64 = 20.0;
pub const EVIDENCE_BASE: f64 = 10.0;
pub const STEP: f64 = 0.1;

/// Model parameters. Only the first seven fields are estimated; threshold,
/// evidence base and step are fixed constants carried for auditability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdmParams {
    /// Evidence lost per second of initial time headway.
    pub alpha: f64,
    pub beta0: f64,
    /// Coefficient on `atan(G_F - G_F0)`.
    pub beta1: f64,
    /// Coefficient on `atan(V_adj - V_HV)`.
    pub beta2: f64,
    /// Coefficient on the gap-growth dummy.
    pub beta3: f64,
    /// Follow gap (m) above which the gap term turns positive.
    pub g_f0: f64,
    /// Diffusion scale, evidence per sqrt(second).
    pub sigma: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_base")]
    pub evidence_base: f64,
    #[serde(default = "default_step")]
    pub dt: f64,
}

fn default_threshold() -> f64 {
    THRESHOLD
}
fn default_base() -> f64 {
    EVIDENCE_BASE
}
fn default_step() -> f64 {
    STEP
}

impl DdmParams {
    /// Estimates reported for the TGSIM I-395 heavy-vehicle sample.
    pub const REFERENCE: DdmParams = DdmParams {
        alpha: 0.3267,
        beta0: -0.2313,
        beta1: 0.1824,
        beta2: 0.0994,
        beta3: 0.7376,
        g_f0: 16.7484,
        sigma: 1.9147,
        threshold: THRESHOLD,
        evidence_base: EVIDENCE_BASE,
        dt: STEP,
    };

    pub const FREE_NAMES: [&'static str; 7] = ["alpha", "beta0", "beta1", "beta2", "beta3", "g_f0", "sigma"];

    pub fn reference() -> Self {
        Self::REFERENCE
    }

    /// The seven estimated parameters, in `FREE_NAMES` order.
    pub fn free(&self) -> [f64; 7] {
        [
            self.alpha, self.beta0, self.beta1, self.beta2, self.beta3, self.g_f0, self.sigma,
        ]
    }

    pub fn with_free(&self, v: &[f64]) -> Self {
        assert_eq!(v.len(), 7, "seven free parameters");
        Self {
            alpha: v[0],
            beta0: v[1],
            beta1: v[2],
            beta2: v[3],
            beta3: v[4],
            g_f0: v[5],
            sigma: v[6],
            ..*self
        }
    }

    pub fn process(&self) -> Diffusion {
        Diffusion {
            sigma: self.sigma,
            threshold: self.threshold,
            dt: self.dt,
        }
    }

    /// Checks structural validity. Unless `allow_override`, the fixed
    /// constants must also equal their canonical values.
    pub fn validate(&self, allow_override: bool) -> Result<()> {
        if !self.free().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.threshold > self.evidence_base) {
            return Err(Error::InvalidParams(format!(
                "threshold {} must exceed evidence base {}",
                self.threshold, self.evidence_base
            )));
        }
        if !allow_override
            && (self.threshold != THRESHOLD || self.evidence_base != EVIDENCE_BASE || self.dt != STEP)
        {
            return Err(Error::InvalidParams(format!(
                "fixed constants must be threshold={THRESHOLD}, evidence_base={EVIDENCE_BASE}, dt={STEP}"
            )));
        }
        Ok(())
    }
}

/// Diffusion settings shared by the recursion and the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusion {
    pub sigma: f64,
    pub threshold: f64,
    pub dt: f64,
}

/// Drift inputs at one step for one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvStep {
    /// Adjacent follow gap, m.
    pub g_f: f64,
    /// Adjacent leader speed, m/s.
    pub v_adj: f64,
    /// HV speed, m/s.
    pub v_hv: f64,
    pub delta_g: u8,
}

pub fn initial_evidence(h0: f64, p: &DdmParams) -> f64 {
    p.evidence_base - p.alpha * h0
}

pub fn drift_rate(env: &EnvStep, p: &DdmParams) -> f64 {
    p.beta0
        + p.beta1 * (env.g_f - p.g_f0).atan()
        + p.beta2 * (env.v_adj - env.v_hv).atan()
        + p.beta3 * f64::from(env.delta_g)
}

pub fn drift_series(env: &[EnvStep], p: &DdmParams) -> Vec<f64> {
    env.iter().map(|e| drift_rate(e, p)).collect()
}
