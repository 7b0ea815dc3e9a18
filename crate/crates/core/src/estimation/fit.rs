use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::likelihood::{total_log_likelihood, Convention, PreparedPair};
use crate::ddm::DdmParams;
use crate::numeric::{two_sided_normal_p, two_sided_student_p};
use crate::optim::{self, BfgsOptions, Convergence};
use crate::{Error, Result};

/// Relative finite-difference step for Hessians and gradients.
pub const FD_REL_STEP: f64 = 1e-4;
/// Absolute floor of the finite-difference step.
pub const FD_ABS_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    /// Two-sided standard normal.
    #[default]
    Normal,
    /// Two-sided Student t with `n_pairs - 7` degrees of freedom.
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub bfgs: BfgsOptions,
    pub convention: Convention,
    pub p_values: PValueMethod,
    /// Accept threshold / base / dt values other than the fixed constants.
    pub allow_constant_override: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions {
                max_iter: 300,
                gtol: 1e-3,
                ftol: 1e-11,
                rel_step: FD_REL_STEP,
                abs_step: FD_ABS_STEP,
            },
            convention: Convention::Density,
            p_values: PValueMethod::Normal,
            allow_constant_override: false,
        }
    }
}

/// Standard errors and significance of the seven free parameters, in
/// [`DdmParams::FREE_NAMES`] order. Entries are `None` where the observed
/// information does not yield a usable variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub std_errors: Vec<Option<f64>>,
    pub t_scores: Vec<Option<f64>>,
    pub p_values: Vec<Option<f64>>,
    /// Whether the observed information matrix was positive definite.
    pub information_positive_definite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: DdmParams,
    pub log_likelihood: f64,
    pub inference: Inference,
    pub convergence: Convergence,
    pub iterations: usize,
    pub evaluations: usize,
    pub n_pairs: usize,
    pub n_lc: usize,
    pub convention: Convention,
}

fn to_search(p: &DdmParams) -> Vec<f64> {
    let mut v = p.free().to_vec();
    v[6] = p.sigma.ln();
    v
}

fn from_search(template: &DdmParams, v: &[f64]) -> DdmParams {
    let mut free = v.to_vec();
    free[6] = v[6].exp();
    template.with_free(&free)
}

/// Maximises the censored log-likelihood over the seven free parameters.
/// `sigma` is searched on a log scale; everything else is unconstrained.
pub fn fit(pairs: &[PreparedPair], p0: &DdmParams, options: &FitOptions) -> Result<FitResult> {
    if pairs.is_empty() {
        return Err(Error::InvalidParams("no pairs to fit".into()));
    }
    p0.validate(options.allow_constant_override)?;
    let conv = options.convention;
    let ll0 = total_log_likelihood(pairs, p0, conv)?;
    if !ll0.is_finite() {
        return Err(Error::NonFiniteLikelihood(format!(
            "log-likelihood {ll0} at starting point {:?}",
            p0.free()
        )));
    }

    let objective = |v: &[f64]| {
        let p = from_search(p0, v);
        match total_log_likelihood(pairs, &p, conv) {
            Ok(ll) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    };
    let m = optim::minimize(objective, &to_search(p0), &options.bfgs)
        .map_err(|e| Error::NonFiniteLikelihood(format!("objective {} at {:?}", e.value, e.x)))?;
    let params = from_search(p0, &m.x);
    log::info!(
        "fit finished after {} iterations ({:?}), LL = {}",
        m.iterations,
        m.convergence,
        -m.f
    );

    let inference = standard_errors(pairs, &params, conv, options.p_values)?;
    Ok(FitResult {
        params,
        log_likelihood: -m.f,
        inference,
        convergence: m.convergence,
        iterations: m.iterations,
        evaluations: m.evaluations,
        n_pairs: pairs.len(),
        n_lc: pairs.iter().filter(|p| p.outcome.is_lane_change()).count(),
        convention: conv,
    })
}

/// Inference from the observed information (negative Hessian of the
/// log-likelihood in the natural parameters, by central differences).
pub fn standard_errors(
    pairs: &[PreparedPair],
    p_hat: &DdmParams,
    convention: Convention,
    method: PValueMethod,
) -> Result<Inference> {
    let ll = |v: &[f64]| total_log_likelihood(pairs, &p_hat.with_free(v), convention).unwrap_or(f64::NAN);
    let hessian = optim::central_hessian(&ll, &p_hat.free(), FD_REL_STEP, FD_ABS_STEP);
    let dof = pairs.len().saturating_sub(7).max(1) as f64;
    Ok(inference_from_information(
        &(-hessian),
        &p_hat.free(),
        method,
        dof,
    ))
}

/// Turns an information matrix into standard errors, t-scores and p-values.
pub fn inference_from_information(
    information: &DMatrix<f64>,
    estimates: &[f64],
    method: PValueMethod,
    dof: f64,
) -> Inference {
    let n = estimates.len();
    let finite = information.iter().all(|v| v.is_finite());
    let pd = finite && information.clone().cholesky().is_some();
    let covariance = if pd {
        information.clone().cholesky().map(|c| c.inverse())
    } else if finite {
        information.clone().try_inverse()
    } else {
        None
    };
    if !pd {
        log::warn!("observed information is not positive definite; some standard errors unavailable");
    }

    let std_errors: Vec<Option<f64>> = (0..n)
        .map(|i| {
            covariance
                .as_ref()
                .map(|c| c[(i, i)])
                .filter(|v| v.is_finite() && *v > 0.0)
                .map(f64::sqrt)
        })
        .collect();
    let t_scores: Vec<Option<f64>> = std_errors
        .iter()
        .zip(estimates)
        .map(|(se, &est)| se.map(|s| est / s))
        .collect();
    let p_values = t_scores
        .iter()
        .map(|t| {
            t.map(|t| match method {
                PValueMethod::Normal => two_sided_normal_p(t),
                PValueMethod::StudentT => two_sided_student_p(t, dof),
            })
        })
        .collect();
    Inference {
        std_errors,
        t_scores,
        p_values,
        information_positive_definite: pd,
    }
}
