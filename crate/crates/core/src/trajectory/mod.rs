//! Trajectory ingestion and heavy-vehicle / car pair extraction.
//!
//! Positions are longitudinal coordinates of the *front bumper*, increasing
//! downstream; a vehicle occupies `[x - length, x]`. All gaps are
//! bumper-to-bumper.

mod environment;
mod pairs;
pub(crate) mod parse;

pub(crate) use environment::fill_gap_growth;
pub use environment::{compute_environment, extract_pairs};
pub use pairs::{find_pairs, SiteIndex};
pub use parse::{parse_trajectories, parse_trajectories_path, ColumnSchema, TrajectorySet, VehicleTrack};

use serde::{Deserialize, Serialize};

use crate::ddm::EnvStep;

/// Sampling interval of the trajectory data, seconds.
pub const SAMPLE_DT: f64 = 0.1;

/// Speed floor used when converting a distance gap into a time headway.
pub const HEADWAY_SPEED_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    Car,
    HeavyVehicle,
}

impl VehicleClass {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "car" | "passenger" | "auto" => Some(VehicleClass::Car),
            "heavy_vehicle" | "heavy-vehicle" | "hv" | "truck" | "bus" => Some(VehicleClass::HeavyVehicle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub vehicle_id: String,
    pub t: f64,
    pub lane: i32,
    pub x: f64,
    pub v: f64,
    pub a: f64,
    pub vclass: VehicleClass,
    pub length: f64,
}

impl TrajectorySample {
    pub fn rear(&self) -> f64 {
        self.x - self.length
    }
}

/// Lateral direction relative to the central vehicle: `-1` left, `+1` right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Left, Direction::Right];

    pub fn sign(self) -> i8 {
        match self {
            Direction::Left => -1,
            Direction::Right => 1,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(value: i8) -> Result<Self, Self::Error> {
        match value {
            -1 => Ok(Direction::Left),
            1 => Ok(Direction::Right),
            other => Err(format!("direction must be -1 or 1, got {other}")),
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        d.sign()
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Left => write!(f, "left"),
            Direction::Right => write!(f, "right"),
        }
    }
}

/// Which way lane indices grow across the carriageway.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaneOrientation {
    /// Lane 1 is leftmost; higher indices are further right.
    #[default]
    IncreasingRight,
    /// Lane 1 is rightmost; higher indices are further left.
    IncreasingLeft,
}

impl LaneOrientation {
    /// Lane index offset of the adjacent lane in `direction`.
    pub fn lane_offset(self, direction: Direction) -> i32 {
        let s = i32::from(direction.sign());
        match self {
            LaneOrientation::IncreasingRight => s,
            LaneOrientation::IncreasingLeft => -s,
        }
    }

    /// Direction of a lane change from `before` to `after`, if any.
    pub fn direction_of_change(self, before: i32, after: i32) -> Option<Direction> {
        let delta = after - before;
        if delta == 0 {
            return None;
        }
        let rightward = match self {
            LaneOrientation::IncreasingRight => delta > 0,
            LaneOrientation::IncreasingLeft => delta < 0,
        };
        Some(if rightward {
            Direction::Right
        } else {
            Direction::Left
        })
    }
}

/// Events that open a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum StartEvent {
    /// The central vehicle changed lanes to be behind the HV.
    CentralLaneChange = 1,
    /// The HV changed lanes to be ahead of the central vehicle.
    HvLaneChange = 2,
    /// An intermediate car left the lane.
    IntermediateLeft = 3,
    /// The pair was already formed when it entered the observed site.
    UpstreamCensored = 4,
}

/// Events that close a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum EndEvent {
    /// The central vehicle changed lanes.
    CentralLaneChange = 1,
    /// The HV changed lanes.
    HvLaneChange = 2,
    /// Another vehicle cut in between the central vehicle and the HV.
    CutIn = 3,
    /// The pair left the observed site downstream.
    DownstreamCensored = 4,
}

macro_rules! event_codes {
    ($ty:ident { $($variant:ident = $code:literal),* }) => {
        impl TryFrom<u8> for $ty {
            type Error = String;
            fn try_from(value: u8) -> Result<Self, Self::Error> {
                match value {
                    $($code => Ok($ty::$variant),)*
                    other => Err(format!("unknown {} code {}", stringify!($ty), other)),
                }
            }
        }
        impl From<$ty> for u8 {
            fn from(e: $ty) -> u8 {
                e as u8
            }
        }
    };
}

event_codes!(StartEvent {
    CentralLaneChange = 1,
    HvLaneChange = 2,
    IntermediateLeft = 3,
    UpstreamCensored = 4
});
event_codes!(EndEvent {
    CentralLaneChange = 1,
    HvLaneChange = 2,
    CutIn = 3,
    DownstreamCensored = 4
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    LcLeft,
    LcRight,
    Censored,
}

impl Outcome {
    pub fn lane_change(direction: Direction) -> Self {
        match direction {
            Direction::Left => Outcome::LcLeft,
            Direction::Right => Outcome::LcRight,
        }
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            Outcome::LcLeft => Some(Direction::Left),
            Outcome::LcRight => Some(Direction::Right),
            Outcome::Censored => None,
        }
    }

    pub fn is_lane_change(self) -> bool {
        self != Outcome::Censored
    }
}

/// Longitudinal extent of the observed site, used to censor missing gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteBounds {
    pub upstream_x: f64,
    pub downstream_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSnapshot {
    pub direction: Direction,
    /// Gap to the adjacent-lane leader, `None` when none is observed.
    pub adjacent_lead_gap: Option<f64>,
    /// Gap to the adjacent-lane follower, `None` when none is observed.
    pub adjacent_follow_gap: Option<f64>,
    pub adjacent_leader_speed: Option<f64>,
    pub lane_exists: bool,
    /// 1 iff the total adjacent gap grew since the previous step.
    pub delta_g: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStep {
    pub t: f64,
    /// Bumper-to-bumper gap to the HV.
    pub g_hv: f64,
    pub v_car: f64,
    pub v_hv: f64,
    pub a_car: f64,
    pub a_hv: f64,
    /// Front-bumper position of the central vehicle.
    pub x_car: f64,
    pub car_length: f64,
    pub neighbors: Vec<NeighborSnapshot>,
}

impl PairStep {
    pub fn neighbor(&self, direction: Direction) -> Option<&NeighborSnapshot> {
        self.neighbors.iter().find(|n| n.direction == direction)
    }

    /// Follow and lead gaps with absent neighbours replaced by the distance
    /// to the site edge.
    pub fn effective_gaps(&self, direction: Direction, site: &SiteBounds) -> Option<(f64, f64)> {
        let n = self.neighbor(direction)?;
        let follow = n
            .adjacent_follow_gap
            .unwrap_or_else(|| (self.x_car - self.car_length - site.upstream_x).max(0.0));
        let lead = n
            .adjacent_lead_gap
            .unwrap_or_else(|| (site.downstream_x - self.x_car).max(0.0));
        Some((follow, lead))
    }

    /// Drift inputs for one direction. A missing adjacent leader contributes
    /// the central vehicle's own speed.
    pub fn env(&self, direction: Direction, site: &SiteBounds) -> Option<EnvStep> {
        let n = self.neighbor(direction)?;
        let (g_f, _) = self.effective_gaps(direction, site)?;
        Some(EnvStep {
            g_f,
            v_adj: n.adjacent_leader_speed.unwrap_or(self.v_car),
            v_hv: self.v_hv,
            delta_g: n.delta_g,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    pub hv_id: String,
    pub car_id: String,
    pub t0: f64,
    pub tmax: f64,
    pub start_event: StartEvent,
    pub end_event: EndEvent,
    pub outcome: Outcome,
    /// Lane of the central vehicle during the pair.
    pub lane: i32,
    pub lanes_available: Vec<Direction>,
    pub site: SiteBounds,
    pub steps: Vec<PairStep>,
}

impl TrajectoryPair {
    pub fn duration(&self) -> f64 {
        self.tmax - self.t0
    }

    pub fn has_direction(&self, direction: Direction) -> bool {
        self.lanes_available.contains(&direction)
    }

    /// Time headway to the HV at the first step, or `None` for an empty pair.
    pub fn initial_headway(&self) -> Option<f64> {
        self.steps.first().map(|s| time_headway(s.g_hv, s.v_car))
    }

    /// Drift inputs for every step in `direction`.
    pub fn env_series(&self, direction: Direction) -> crate::Result<Vec<EnvStep>> {
        if !self.has_direction(direction) {
            return Err(crate::Error::DirectionUnavailable(direction.sign()));
        }
        self.steps
            .iter()
            .map(|s| {
                s.env(direction, &self.site)
                    .ok_or(crate::Error::DirectionUnavailable(direction.sign()))
            })
            .collect()
    }
}

/// Time headway in seconds: distance gap over the (floored) follower speed.
pub fn time_headway(gap: f64, speed: f64) -> f64 {
    gap / speed.max(HEADWAY_SPEED_FLOOR)
}

/// Settings for pair extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    /// Lanes in which the central vehicle may be observed.
    pub lanes: Vec<i32>,
    pub min_duration: f64,
    pub orientation: LaneOrientation,
    /// Lanes that exist at the site; defaults to all lanes seen in the data.
    pub site_lanes: Option<Vec<i32>>,
    /// Site extent; defaults to the extent of the data.
    pub site_bounds: Option<SiteBounds>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            lanes: vec![3, 4, 5],
            min_duration: 5.0,
            orientation: LaneOrientation::default(),
            site_lanes: None,
            site_bounds: None,
        }
    }
}
