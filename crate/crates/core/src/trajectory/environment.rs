use rayon::prelude::*;

use super::pairs::{find_pairs, SiteIndex};
use super::parse::{to_tick, TrajectorySet};
use super::{ExtractConfig, LaneOrientation, NeighborSnapshot, PairStep, TrajectoryPair};
use crate::{Error, Result};

/// Fills the per-step series of a pair: lead gap to the HV, kinematics, and
/// for every available direction the adjacent follow/lead gaps, the adjacent
/// leader's speed, and the gap-growth dummy.
pub fn compute_environment(
    pair: &TrajectoryPair,
    set: &TrajectorySet,
    index: &SiteIndex,
    orientation: LaneOrientation,
) -> Result<TrajectoryPair> {
    let first = to_tick(pair.t0).expect("pair start on grid");
    let last = to_tick(pair.tmax).expect("pair end on grid");
    let mut steps: Vec<PairStep> = Vec::with_capacity((last - first + 1) as usize);

    for tick in first..=last {
        let time = super::parse::tick_time(tick);
        let car = index
            .sample(set, &pair.car_id, tick)
            .ok_or_else(|| Error::MissingSample {
                vehicle: pair.car_id.clone(),
                time,
            })?;
        let hv = index
            .sample(set, &pair.hv_id, tick)
            .ok_or_else(|| Error::MissingSample {
                vehicle: pair.hv_id.clone(),
                time,
            })?;

        let neighbors = pair
            .lanes_available
            .iter()
            .map(|&direction| {
                let adjacent = car.lane + orientation.lane_offset(direction);
                let slots = index.lane(tick, adjacent);
                let follower = slots
                    .iter()
                    .filter(|s| s.x < car.rear())
                    .max_by(|a, b| a.x.total_cmp(&b.x));
                let leader = slots
                    .iter()
                    .filter(|s| s.rear > car.x)
                    .min_by(|a, b| a.rear.total_cmp(&b.rear));
                NeighborSnapshot {
                    direction,
                    adjacent_lead_gap: leader.map(|l| l.rear - car.x),
                    adjacent_follow_gap: follower.map(|f| car.rear() - f.x),
                    adjacent_leader_speed: leader.map(|l| l.v),
                    lane_exists: true,
                    delta_g: 0,
                }
            })
            .collect();

        steps.push(PairStep {
            t: time,
            g_hv: (hv.rear() - car.x).max(0.0),
            v_car: car.v,
            v_hv: hv.v,
            a_car: car.a,
            a_hv: hv.a,
            x_car: car.x,
            car_length: car.length,
            neighbors,
        });
    }

    let mut out = pair.clone();
    out.steps = steps;
    fill_gap_growth(&mut out);
    Ok(out)
}

/// Recomputes every `delta_g` from the effective total adjacent gap.
pub(crate) fn fill_gap_growth(pair: &mut TrajectoryPair) {
    let site = pair.site;
    for &direction in &pair.lanes_available.clone() {
        let mut prev_total: Option<f64> = None;
        for step in pair.steps.iter_mut() {
            let total = step
                .effective_gaps(direction, &site)
                .map(|(f, l)| f + l)
                .expect("neighbor snapshot for every available direction");
            let grew = prev_total.is_some_and(|p| total > p);
            if let Some(n) = step.neighbors.iter_mut().find(|n| n.direction == direction) {
                n.delta_g = u8::from(grew);
            }
            prev_total = Some(total);
        }
    }
}

/// Finds all pairs and computes their environment series.
pub fn extract_pairs(set: &TrajectorySet, cfg: &ExtractConfig) -> Result<Vec<TrajectoryPair>> {
    let index = SiteIndex::build(set);
    let pairs = find_pairs(set, &index, cfg);
    pairs
        .par_iter()
        .map(|p| compute_environment(p, set, &index, cfg.orientation))
        .collect()
}
