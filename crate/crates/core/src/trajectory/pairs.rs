use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::parse::{tick_time, TrajectorySet};
use super::{
    Direction, EndEvent, ExtractConfig, Outcome, SiteBounds, StartEvent, TrajectoryPair, VehicleClass,
    SAMPLE_DT,
};

/// One vehicle occupying a lane at one tick.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slot {
    pub x: f64,
    pub rear: f64,
    pub v: f64,
    pub track: usize,
}

/// Per-tick, per-lane occupancy of the site, each lane sorted by position.
#[derive(Debug, Default)]
pub struct SiteIndex {
    frames: HashMap<i64, BTreeMap<i32, Vec<Slot>>>,
    lanes: BTreeSet<i32>,
    bounds: Option<SiteBounds>,
    by_vehicle: HashMap<String, Vec<usize>>,
}

impl SiteIndex {
    pub fn build(set: &TrajectorySet) -> Self {
        let mut index = SiteIndex::default();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (track_idx, track) in set.tracks.iter().enumerate() {
            index
                .by_vehicle
                .entry(track.vehicle_id.clone())
                .or_default()
                .push(track_idx);
            for (offset, s) in track.samples.iter().enumerate() {
                let tick = track.start_tick + offset as i64;
                index.lanes.insert(s.lane);
                lo = lo.min(s.rear());
                hi = hi.max(s.x);
                index
                    .frames
                    .entry(tick)
                    .or_default()
                    .entry(s.lane)
                    .or_default()
                    .push(Slot {
                        x: s.x,
                        rear: s.rear(),
                        v: s.v,
                        track: track_idx,
                    });
            }
        }
        for lanes in index.frames.values_mut() {
            for slots in lanes.values_mut() {
                slots.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.track.cmp(&b.track)));
            }
        }
        if lo.is_finite() && hi.is_finite() {
            index.bounds = Some(SiteBounds {
                upstream_x: lo,
                downstream_x: hi,
            });
        }
        index
    }

    /// Lanes observed anywhere in the data.
    pub fn observed_lanes(&self) -> &BTreeSet<i32> {
        &self.lanes
    }

    /// Extent of the data, if any samples exist.
    pub fn observed_bounds(&self) -> Option<SiteBounds> {
        self.bounds
    }

    /// Sample of `vehicle_id` at `tick`, searching all of its tracks.
    pub(crate) fn sample<'a>(
        &self,
        set: &'a TrajectorySet,
        vehicle_id: &str,
        tick: i64,
    ) -> Option<&'a super::TrajectorySample> {
        self.by_vehicle
            .get(vehicle_id)?
            .iter()
            .find_map(|&t| set.tracks[t].at_tick(tick))
    }

    pub(crate) fn lane(&self, tick: i64, lane: i32) -> &[Slot] {
        self.frames
            .get(&tick)
            .and_then(|f| f.get(&lane))
            .map_or(&[], Vec::as_slice)
    }

    /// Nearest vehicle in `lane` whose front bumper is strictly downstream of `x`.
    pub(crate) fn leader(&self, tick: i64, lane: i32, x: f64) -> Option<Slot> {
        let slots = self.lane(tick, lane);
        let idx = slots.partition_point(|s| s.x <= x);
        slots.get(idx).copied()
    }
}

fn start_event(
    set: &TrajectorySet,
    index: &SiteIndex,
    car: usize,
    hv: usize,
    start: i64,
    lane: i32,
) -> StartEvent {
    let Some(prev) = set.tracks[car].at_tick(start - 1) else {
        return StartEvent::UpstreamCensored;
    };
    if prev.lane != lane {
        return StartEvent::CentralLaneChange;
    }
    if let Some(hv_prev) = set.tracks[hv].at_tick(start - 1) {
        if hv_prev.lane != lane {
            return StartEvent::HvLaneChange;
        }
    }
    match index.leader(start - 1, lane, prev.x) {
        Some(slot) if slot.track != hv => StartEvent::IntermediateLeft,
        _ => StartEvent::UpstreamCensored,
    }
}

fn end_event(
    set: &TrajectorySet,
    car: usize,
    hv: usize,
    end: i64,
    lane: i32,
    cfg: &ExtractConfig,
) -> (EndEvent, Outcome) {
    let next = set.tracks[car].at_tick(end + 1);
    if let Some(next) = next {
        if let Some(d) = cfg.orientation.direction_of_change(lane, next.lane) {
            return (EndEvent::CentralLaneChange, Outcome::lane_change(d));
        }
    }
    match set.tracks[hv].at_tick(end + 1) {
        None => (EndEvent::DownstreamCensored, Outcome::Censored),
        Some(h) if h.lane != lane => (EndEvent::HvLaneChange, Outcome::Censored),
        Some(_) if next.is_none() => (EndEvent::DownstreamCensored, Outcome::Censored),
        Some(_) => (EndEvent::CutIn, Outcome::Censored),
    }
}

/// Finds every maximal interval during which a car directly follows a heavy
/// vehicle in a whitelisted lane.
///
/// The returned pairs carry their event tags and outcome but no steps; see
/// [`compute_environment`](super::compute_environment). Output is sorted by
/// start time, then car id, then HV id.
pub fn find_pairs(set: &TrajectorySet, index: &SiteIndex, cfg: &ExtractConfig) -> Vec<TrajectoryPair> {
    let whitelist: BTreeSet<i32> = cfg.lanes.iter().copied().collect();
    let site_lanes: BTreeSet<i32> = cfg
        .site_lanes
        .as_ref()
        .map(|l| l.iter().copied().collect())
        .unwrap_or_else(|| index.observed_lanes().clone());
    let site = cfg.site_bounds.or(index.observed_bounds()).unwrap_or(SiteBounds {
        upstream_x: 0.0,
        downstream_x: 0.0,
    });

    let mut pairs = Vec::new();
    for (car_idx, car) in set.tracks.iter().enumerate() {
        if car.vclass != VehicleClass::Car {
            continue;
        }
        // (hv track, lane, first tick, last tick)
        let mut runs: Vec<(usize, i32, i64, i64)> = Vec::new();
        for (offset, s) in car.samples.iter().enumerate() {
            let tick = car.start_tick + offset as i64;
            let hv = if whitelist.contains(&s.lane) {
                index
                    .leader(tick, s.lane, s.x)
                    .filter(|l| set.tracks[l.track].vclass == VehicleClass::HeavyVehicle)
                    .map(|l| l.track)
            } else {
                None
            };
            let Some(hv) = hv else { continue };
            match runs.last_mut() {
                Some(run) if run.0 == hv && run.1 == s.lane && run.3 == tick - 1 => run.3 = tick,
                _ => runs.push((hv, s.lane, tick, tick)),
            }
        }
        for (hv, lane, first, last) in runs {
            let duration = (last - first) as f64 * SAMPLE_DT;
            if duration + 1e-9 < cfg.min_duration {
                continue;
            }
            let start = start_event(set, index, car_idx, hv, first, lane);
            let (end, outcome) = end_event(set, car_idx, hv, last, lane, cfg);
            let lanes_available = Direction::BOTH
                .into_iter()
                .filter(|d| site_lanes.contains(&(lane + cfg.orientation.lane_offset(*d))))
                .collect();
            pairs.push(TrajectoryPair {
                hv_id: set.tracks[hv].vehicle_id.clone(),
                car_id: car.vehicle_id.clone(),
                t0: tick_time(first),
                tmax: tick_time(last),
                start_event: start,
                end_event: end,
                outcome,
                lane,
                lanes_available,
                site,
                steps: Vec::new(),
            });
        }
    }
    pairs.sort_by(|a, b| {
        a.t0.total_cmp(&b.t0)
            .then_with(|| a.car_id.cmp(&b.car_id))
            .then_with(|| a.hv_id.cmp(&b.hv_id))
    });
    pairs
}
