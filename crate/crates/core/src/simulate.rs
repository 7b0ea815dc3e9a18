//! Monte-Carlo forward simulation of the discretised evidence process.
//!
//! Paths follow the Euler update
//! `A(t_{i+1}) = A(t_i) + mu(t_i) dt + sigma Z_i sqrt(dt)`. Every path draws
//! from its own keyed stream, so results do not depend on thread schedule.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ddm::{drift_rate, drift_series, initial_evidence, DdmParams, EnvStep};
use crate::rng::{direction_key, keyed_rng};
use crate::trajectory::{
    fill_gap_growth, parse, Direction, EndEvent, NeighborSnapshot, Outcome, PairStep, SiteBounds, StartEvent,
    TrajectoryPair,
};
use crate::{Error, Result};

/// How a threshold crossing between grid points is detected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingRule {
    /// Also count crossings between grid points, using the Brownian-bridge
    /// crossing probability `exp(-2 (S - A_i)(S - A_{i+1}) / (sigma^2 dt))`.
    /// Matches the continuous-time passage law the recursion approximates.
    #[default]
    Bridge,
    /// Only `A(t_i) >= S` at grid points counts.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub horizon: f64,
    pub params: DdmParams,
    #[serde(default)]
    pub crossing: CrossingRule,
}

impl SimConfig {
    /// Number of steps after the initial one.
    pub fn steps(&self) -> Result<usize> {
        if self.n_paths == 0 {
            return Err(Error::InvalidScenario("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !(self.horizon >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "dt = {}, horizon = {}",
                self.dt, self.horizon
            )));
        }
        let n = (self.horizon / self.dt).round();
        if (n * self.dt - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return Err(Error::InvalidScenario(format!(
                "horizon {} is not a multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Drift input of a simulation.
#[derive(Debug, Clone, Copy)]
pub enum DriftInput<'a> {
    Constant(f64),
    /// Drift per step; the last value is held past the end.
    Series(&'a [f64]),
    /// Environment per step, mapped through the drift rate of `params`.
    Env(&'a [EnvStep]),
}

impl DriftInput<'_> {
    fn resolve(&self, n_points: usize, p: &DdmParams) -> Vec<f64> {
        let hold = |values: &[f64]| -> Vec<f64> {
            (0..n_points)
                .map(|i| values[i.min(values.len().saturating_sub(1))])
                .collect()
        };
        match *self {
            DriftInput::Constant(mu) => vec![mu; n_points],
            DriftInput::Series([]) => vec![0.0; n_points],
            DriftInput::Series(s) => hold(s),
            DriftInput::Env([]) => vec![0.0; n_points],
            DriftInput::Env(e) => hold(&drift_series(e, p)),
        }
    }
}

/// Empirical first-passage sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageSample {
    pub dt: f64,
    /// Passage step per path, `None` if censored at the horizon.
    pub passage_step: Vec<Option<u32>>,
    /// Number of paths passing at each step.
    pub counts: Vec<u64>,
    /// Empirical CDF at each step.
    pub cdf: Vec<f64>,
}

impl PassageSample {
    pub fn n_paths(&self) -> usize {
        self.passage_step.len()
    }

    pub fn passage_times(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.passage_step.iter().map(|s| s.map(|k| k as f64 * self.dt))
    }

    /// Empirical CDF at time `t` (nearest grid step at or before `t`).
    pub fn cdf_at(&self, t: f64) -> f64 {
        let idx = ((t / self.dt) + 1e-9).floor() as usize;
        self.cdf[idx.min(self.cdf.len() - 1)]
    }
}

/// Simulates one path over the drift series; returns the passage step.
///
/// Both the normal increment and the bridge uniform are drawn at every
/// step, so two drifts driven by the same stream share their noise.
pub fn simulate_path(
    a0: f64,
    mu: &[f64],
    sigma: f64,
    threshold: f64,
    dt: f64,
    crossing: CrossingRule,
    rng: &mut ChaCha8Rng,
) -> Option<u32> {
    if a0 >= threshold {
        return Some(0);
    }
    let sqrt_dt = dt.sqrt();
    let bridge_scale = 2.0 / (sigma * sigma * dt);
    let mut drift_sum = 0.0;
    let mut noise_sum = 0.0;
    let mut level = a0;
    for (i, &m) in mu.iter().enumerate().take(mu.len().saturating_sub(1)) {
        let z: f64 = StandardNormal.sample(rng);
        let u: f64 = rng.random();
        drift_sum += m;
        noise_sum += z;
        let next = a0 + dt * drift_sum + sigma * sqrt_dt * noise_sum;
        let crossed = next >= threshold
            || (crossing == CrossingRule::Bridge
                && sigma > 0.0
                && u < (-(threshold - level) * (threshold - next) * bridge_scale).exp());
        if crossed {
            return Some(i as u32 + 1);
        }
        level = next;
    }
    None
}

/// Simulates `cfg.n_paths` independent paths from `a0`.
pub fn simulate_paths(a0: f64, drift: DriftInput<'_>, cfg: &SimConfig) -> Result<PassageSample> {
    let steps = cfg.steps()?;
    let mu = drift.resolve(steps + 1, &cfg.params);
    let p = &cfg.params;
    let passage_step: Vec<Option<u32>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = keyed_rng(&[cfg.seed, 0, 0, path]);
            simulate_path(a0, &mu, p.sigma, p.threshold, cfg.dt, cfg.crossing, &mut rng)
        })
        .collect();

    let mut counts = vec![0u64; steps + 1];
    for s in passage_step.iter().flatten() {
        counts[*s as usize] += 1;
    }
    let mut running = 0u64;
    let cdf = counts
        .iter()
        .map(|c| {
            running += c;
            running as f64 / cfg.n_paths as f64
        })
        .collect();
    Ok(PassageSample {
        dt: cfg.dt,
        passage_step,
        counts,
        cdf,
    })
}

/// Distributions of the synthetic pair generator. Ranges are `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Planned observation window, seconds.
    pub duration: (f64, f64),
    pub two_lane_probability: f64,
    /// Initial time headway to the HV, seconds.
    pub headway: (f64, f64),
    pub hv_speed: (f64, f64),
    pub follow_gap: (f64, f64),
    pub lead_gap: (f64, f64),
    /// Adjacent leader speed minus HV speed.
    pub speed_difference: (f64, f64),
    /// Magnitude of the adjacent gaps' rate of change, m/s.
    pub gap_rate: (f64, f64),
    /// Rate (1/s) of switching between growing and shrinking gap regimes.
    pub regime_switch_rate: f64,
    /// Rate (1/s) at which the adjacent follower and leader are replaced.
    pub neighbor_change_rate: f64,
    pub car_length: f64,
    pub crossing: CrossingRule,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration: (5.0, 40.0),
            two_lane_probability: 0.5,
            headway: (0.5, 3.0),
            hv_speed: (18.0, 26.0),
            follow_gap: (0.0, 40.0),
            lead_gap: (2.0, 40.0),
            speed_difference: (-4.0, 6.0),
            gap_rate: (0.2, 2.0),
            regime_switch_rate: 0.2,
            neighbor_change_rate: 0.05,
            car_length: 4.5,
            crossing: CrossingRule::Bridge,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("duration", self.duration),
            ("headway", self.headway),
            ("hv_speed", self.hv_speed),
            ("follow_gap", self.follow_gap),
            ("lead_gap", self.lead_gap),
            ("speed_difference", self.speed_difference),
            ("gap_rate", self.gap_rate),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidScenario(format!("{name} range [{lo}, {hi}]")));
            }
        }
        let non_negative = [
            ("duration", self.duration.0),
            ("headway", self.headway.0),
            ("hv_speed", self.hv_speed.0),
            ("follow_gap", self.follow_gap.0),
            ("lead_gap", self.lead_gap.0),
            ("gap_rate", self.gap_rate.0),
            ("regime_switch_rate", self.regime_switch_rate),
            ("neighbor_change_rate", self.neighbor_change_rate),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.duration.0 < crate::trajectory::SAMPLE_DT {
            return Err(Error::InvalidScenario(
                "duration must cover at least one step".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.two_lane_probability) {
            return Err(Error::InvalidScenario(
                "two_lane_probability outside [0, 1]".into(),
            ));
        }
        if !(self.car_length > 0.0) {
            return Err(Error::InvalidScenario("car_length must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub pairs: Vec<TrajectoryPair>,
    /// Pairs whose two directions crossed at the same step.
    pub ties: usize,
}

const ENV_STREAM: u64 = 3;
const TIE_STREAM: u64 = 4;

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

struct LaneProcess {
    follow: f64,
    lead: f64,
    speed_difference: f64,
    growing: bool,
    follow_rate: f64,
    lead_rate: f64,
}

impl LaneProcess {
    fn draw(rng: &mut ChaCha8Rng, s: &ScenarioConfig) -> Self {
        Self {
            follow: uniform(rng, s.follow_gap),
            lead: uniform(rng, s.lead_gap),
            speed_difference: uniform(rng, s.speed_difference),
            growing: rng.random_bool(0.5),
            follow_rate: uniform(rng, s.gap_rate),
            lead_rate: uniform(rng, s.gap_rate),
        }
    }

    fn advance(&mut self, rng: &mut ChaCha8Rng, s: &ScenarioConfig, dt: f64) {
        if rng.random::<f64>() < s.regime_switch_rate * dt {
            self.growing = !self.growing;
            self.follow_rate = uniform(rng, s.gap_rate);
            self.lead_rate = uniform(rng, s.gap_rate);
        }
        if rng.random::<f64>() < s.neighbor_change_rate * dt {
            self.follow = uniform(rng, s.follow_gap);
            self.lead = uniform(rng, s.lead_gap);
            self.speed_difference = uniform(rng, s.speed_difference);
        }
        let sign = if self.growing { 1.0 } else { -1.0 };
        self.follow = (self.follow + sign * self.follow_rate * dt).max(0.0);
        self.lead = (self.lead + sign * self.lead_rate * dt).max(0.0);
    }
}

/// Generates `n_pairs` synthetic HV-car pairs whose lane-change outcomes are
/// drawn from the evidence process under `truth`.
///
/// Pairs are not filtered by duration: a pair whose evidence crosses early
/// is kept with its short window, so the sample carries no selection on
/// the outcome.
pub fn generate_synthetic_pairs(
    truth: &DdmParams,
    n_pairs: usize,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<SyntheticDataset> {
    scenario.validate()?;
    truth.validate(true)?;
    let dt = truth.dt;
    let generated: Vec<(TrajectoryPair, bool)> = (0..n_pairs as u64)
        .into_par_iter()
        .map(|idx| synthetic_pair(truth, scenario, seed, idx, dt))
        .collect();
    let ties = generated.iter().filter(|(_, tie)| *tie).count();
    Ok(SyntheticDataset {
        pairs: generated.into_iter().map(|(p, _)| p).collect(),
        ties,
    })
}

fn synthetic_pair(
    truth: &DdmParams,
    s: &ScenarioConfig,
    seed: u64,
    idx: u64,
    dt: f64,
) -> (TrajectoryPair, bool) {
    let mut rng = keyed_rng(&[seed, idx, ENV_STREAM]);
    let duration = uniform(&mut rng, s.duration);
    let n_points = (duration / dt).round() as usize + 1;
    let directions: Vec<Direction> = if rng.random_bool(s.two_lane_probability) {
        Direction::BOTH.to_vec()
    } else if rng.random_bool(0.5) {
        vec![Direction::Left]
    } else {
        vec![Direction::Right]
    };
    let v_hv = uniform(&mut rng, s.hv_speed);
    let headway = uniform(&mut rng, s.headway);
    let g_hv = headway * v_hv;

    let mut lanes: Vec<LaneProcess> = directions
        .iter()
        .map(|_| LaneProcess::draw(&mut rng, s))
        .collect();
    let mut steps = Vec::with_capacity(n_points);
    for i in 0..n_points {
        if i > 0 {
            for lane in &mut lanes {
                lane.advance(&mut rng, s, dt);
            }
        }
        let t = parse::tick_time(i as i64);
        steps.push(PairStep {
            t,
            g_hv,
            v_car: v_hv,
            v_hv,
            a_car: 0.0,
            a_hv: 0.0,
            x_car: s.car_length + v_hv * t,
            car_length: s.car_length,
            neighbors: directions
                .iter()
                .zip(&lanes)
                .map(|(&direction, lane)| NeighborSnapshot {
                    direction,
                    adjacent_lead_gap: Some(lane.lead),
                    adjacent_follow_gap: Some(lane.follow),
                    adjacent_leader_speed: Some(v_hv + lane.speed_difference),
                    lane_exists: true,
                    delta_g: 0,
                })
                .collect(),
        });
    }

    let end_x = s.car_length + v_hv * parse::tick_time(n_points as i64 - 1);
    let mut pair = TrajectoryPair {
        hv_id: format!("hv{idx:06}"),
        car_id: format!("car{idx:06}"),
        t0: 0.0,
        tmax: parse::tick_time(n_points as i64 - 1),
        start_event: StartEvent::UpstreamCensored,
        end_event: EndEvent::DownstreamCensored,
        outcome: Outcome::Censored,
        lane: 0,
        lanes_available: directions.clone(),
        site: SiteBounds {
            upstream_x: 0.0,
            downstream_x: end_x + 1000.0,
        },
        steps,
    };
    fill_gap_growth(&mut pair);

    let a0 = initial_evidence(headway, truth);
    let crossings: Vec<(Direction, Option<u32>)> = directions
        .iter()
        .map(|&d| {
            let mu: Vec<f64> = pair
                .steps
                .iter()
                .map(|st| drift_rate(&st.env(d, &pair.site).expect("direction present"), truth))
                .collect();
            let mut noise = keyed_rng(&[seed, idx, direction_key(d.sign()), 0]);
            (
                d,
                simulate_path(a0, &mu, truth.sigma, truth.threshold, dt, s.crossing, &mut noise),
            )
        })
        .collect();

    let first = crossings.iter().filter_map(|(_, c)| *c).min();
    let mut tie = false;
    if let Some(step) = first {
        let winners: Vec<Direction> = crossings
            .iter()
            .filter(|(_, c)| *c == Some(step))
            .map(|(d, _)| *d)
            .collect();
        let winner = if winners.len() > 1 {
            tie = true;
            let mut tie_rng = keyed_rng(&[seed, idx, TIE_STREAM]);
            winners[tie_rng.random_range(0..winners.len())]
        } else {
            winners[0]
        };
        pair.steps.truncate(step as usize + 1);
        pair.tmax = parse::tick_time(step as i64);
        pair.outcome = Outcome::lane_change(winner);
        pair.end_event = EndEvent::CentralLaneChange;
    }
    (pair, tie)
}
