use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ddm::{first_passage, initial_evidence, DdmParams, EnvStep, FirstPassageResult};
use crate::numeric::compensated_sum;
use crate::trajectory::{Direction, Outcome, TrajectoryPair};
use crate::{Error, Result};

/// Floor applied to every probability factor before taking logs.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// How a lane-change observation enters the likelihood: as the first-passage
/// density at `t_max` (1/s) or as the per-step mass `density * dt`. The two
/// differ by `ln(dt)` per lane-change pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Density,
    Mass,
}

/// A pair reduced to what the likelihood needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPair {
    pub initial_headway: f64,
    pub outcome: Outcome,
    pub directions: Vec<(Direction, Vec<EnvStep>)>,
}

impl PreparedPair {
    pub fn from_pair(pair: &TrajectoryPair) -> Result<Self> {
        let initial_headway = pair.initial_headway().ok_or_else(|| {
            Error::InvalidParams(format!("pair {}/{} has no steps", pair.hv_id, pair.car_id))
        })?;
        let directions = pair
            .lanes_available
            .iter()
            .map(|&d| Ok((d, pair.env_series(d)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            initial_headway,
            outcome: pair.outcome,
            directions,
        })
    }

    fn passage(&self, env: &[EnvStep], p: &DdmParams) -> FirstPassageResult {
        let a0 = initial_evidence(self.initial_headway, p);
        match first_passage(a0, env, p) {
            Ok(r) => r,
            Err(_) => FirstPassageResult::absorbed(env.len(), p.dt),
        }
    }

    pub fn log_likelihood(&self, p: &DdmParams, convention: Convention) -> f64 {
        let results: Vec<(Direction, FirstPassageResult)> = self
            .directions
            .iter()
            .map(|(d, env)| (*d, self.passage(env, p)))
            .collect();
        let refs: Vec<(Direction, &FirstPassageResult)> = results.iter().map(|(d, r)| (*d, r)).collect();
        log_likelihood_from_passage(self.outcome, &refs, convention, p.dt)
    }
}

pub fn prepare_pairs(pairs: &[TrajectoryPair]) -> Result<Vec<PreparedPair>> {
    pairs.iter().map(PreparedPair::from_pair).collect()
}

/// Log-likelihood contribution from per-direction passage results evaluated
/// at the pair's last step.
pub fn log_likelihood_from_passage(
    outcome: Outcome,
    passage: &[(Direction, &FirstPassageResult)],
    convention: Convention,
    dt: f64,
) -> f64 {
    let cdf = |d: Direction| {
        passage
            .iter()
            .find(|(pd, _)| *pd == d)
            .map_or(0.0, |(_, r)| r.last_cdf())
    };
    let survival = |d: Direction| (1.0 - cdf(d)).max(PROBABILITY_FLOOR);
    match outcome.direction() {
        Some(d) => {
            let density = passage
                .iter()
                .find(|(pd, _)| *pd == d)
                .map_or(0.0, |(_, r)| r.last_density())
                .max(PROBABILITY_FLOOR);
            let shift = match convention {
                Convention::Density => 0.0,
                Convention::Mass => dt.ln(),
            };
            density.ln() + shift + survival(d.opposite()).ln()
        }
        None => survival(Direction::Left).ln() + survival(Direction::Right).ln(),
    }
}

/// Log-likelihood of a single pair.
pub fn pair_log_likelihood(pair: &TrajectoryPair, p: &DdmParams, convention: Convention) -> Result<f64> {
    Ok(PreparedPair::from_pair(pair)?.log_likelihood(p, convention))
}

/// Sum of pair contributions, evaluated in parallel and reduced in input
/// order with compensated summation.
pub fn total_log_likelihood(pairs: &[PreparedPair], p: &DdmParams, convention: Convention) -> Result<f64> {
    if !p.free().iter().all(|v| v.is_finite()) || !(p.sigma > 0.0) {
        return Err(Error::InvalidParams(format!(
            "cannot evaluate likelihood at {:?}",
            p.free()
        )));
    }
    let terms: Vec<f64> = pairs
        .par_iter()
        .map(|pair| pair.log_likelihood(p, convention))
        .collect();
    Ok(compensated_sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passage_with(last_g: f64, last_cdf: f64) -> FirstPassageResult {
        FirstPassageResult {
            t_grid: vec![0.0, 0.1],
            g: vec![0.0, last_g],
            cdf: vec![0.0, last_cdf],
            clamped_mass: 0.0,
            overshoot: 0.0,
        }
    }

    #[test]
    fn censored_single_lane() {
        let r = passage_with(0.01, 0.25);
        let ll = log_likelihood_from_passage(
            Outcome::Censored,
            &[(Direction::Right, &r)],
            Convention::Density,
            0.1,
        );
        assert!((ll - 0.75f64.ln()).abs() < 1e-15);
        assert!((ll + 0.287_682_072_451_780_9).abs() < 1e-12);
    }

    #[test]
    fn lane_change_left_with_both_lanes() {
        let left = passage_with(0.02, 0.3);
        let right = passage_with(0.5, 0.1);
        let ll = log_likelihood_from_passage(
            Outcome::LcLeft,
            &[(Direction::Left, &left), (Direction::Right, &right)],
            Convention::Density,
            0.1,
        );
        assert!((ll - 0.018f64.ln()).abs() < 1e-14);
        assert!((ll + 4.017_383_521_085_972).abs() < 1e-9);
    }

    #[test]
    fn floors_prevent_infinities() {
        let dead = passage_with(0.0, 1.0);
        let ll = log_likelihood_from_passage(
            Outcome::LcRight,
            &[(Direction::Right, &dead)],
            Convention::Density,
            0.1,
        );
        assert!((ll - PROBABILITY_FLOOR.ln()).abs() < 1e-12);
        let ll = log_likelihood_from_passage(
            Outcome::Censored,
            &[(Direction::Left, &dead)],
            Convention::Mass,
            0.1,
        );
        assert!(ll.is_finite());
    }

    #[test]
    fn mass_convention_shift() {
        let r = passage_with(0.2, 0.4);
        let d = log_likelihood_from_passage(
            Outcome::LcRight,
            &[(Direction::Right, &r)],
            Convention::Density,
            0.1,
        );
        let m =
            log_likelihood_from_passage(Outcome::LcRight, &[(Direction::Right, &r)], Convention::Mass, 0.1);
        assert!((m - d - 0.1f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(
            total_log_likelihood(&[], &DdmParams::REFERENCE, Convention::Density).unwrap(),
            0.0
        );
        let bad = DdmParams {
            alpha: f64::NAN,
            ..DdmParams::REFERENCE
        };
        assert!(total_log_likelihood(&[], &bad, Convention::Density).is_err());
    }
}
