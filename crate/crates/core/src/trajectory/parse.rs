use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TrajectorySample, VehicleClass, SAMPLE_DT};
use crate::{Error, Result};

/// Tolerance, in ticks, for a timestamp to count as on-grid.
const TICK_TOLERANCE: f64 = 1e-6;

/// Maps the required fields onto CSV header names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub vehicle_id: String,
    pub time: String,
    pub lane: String,
    pub x: String,
    pub speed: String,
    pub accel: String,
    pub class: String,
    pub length: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            vehicle_id: "vehicle_id".into(),
            time: "time_s".into(),
            lane: "lane".into(),
            x: "x_m".into(),
            speed: "speed_mps".into(),
            accel: "accel_mps2".into(),
            class: "class".into(),
            length: "length_m".into(),
        }
    }
}

/// A contiguous, gap-free record of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrack {
    pub vehicle_id: String,
    pub vclass: VehicleClass,
    /// Tick (time / 0.1 s) of the first sample.
    pub start_tick: i64,
    pub samples: Vec<TrajectorySample>,
}

impl VehicleTrack {
    pub fn end_tick(&self) -> i64 {
        self.start_tick + self.samples.len() as i64 - 1
    }

    pub fn at_tick(&self, tick: i64) -> Option<&TrajectorySample> {
        if tick < self.start_tick {
            return None;
        }
        self.samples.get((tick - self.start_tick) as usize)
    }
}

/// All tracks of a dataset, ordered by vehicle id then start time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectorySet {
    pub tracks: Vec<VehicleTrack>,
}

impl TrajectorySet {
    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn sample_count(&self) -> usize {
        self.tracks.iter().map(|t| t.samples.len()).sum()
    }
}

pub fn to_tick(t: f64) -> Option<i64> {
    let scaled = t / SAMPLE_DT;
    let tick = scaled.round();
    ((scaled - tick).abs() <= TICK_TOLERANCE && tick.is_finite()).then_some(tick as i64)
}

pub fn tick_time(tick: i64) -> f64 {
    // Division keeps values such as 0.3 exact where multiplication would not.
    tick as f64 / 10.0
}

struct Columns {
    vehicle_id: usize,
    time: usize,
    lane: usize,
    x: usize,
    speed: usize,
    accel: usize,
    class: usize,
    length: usize,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, schema: &ColumnSchema) -> Result<Self> {
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        Ok(Self {
            vehicle_id: find(&schema.vehicle_id)?,
            time: find(&schema.time)?,
            lane: find(&schema.lane)?,
            x: find(&schema.x)?,
            speed: find(&schema.speed)?,
            accel: find(&schema.accel)?,
            class: find(&schema.class)?,
            length: find(&schema.length)?,
        })
    }
}

fn field<'r>(record: &'r csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<&'r str> {
    record.get(idx).map(str::trim).ok_or_else(|| Error::MalformedRow {
        line,
        message: format!("missing field `{name}`"),
    })
}

fn number(record: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<f64> {
    let raw = field(record, idx, name, line)?;
    let v: f64 = raw.parse().map_err(|_| Error::MalformedRow {
        line,
        message: format!("`{name}` is not a number: {raw:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::MalformedRow {
            line,
            message: format!("`{name}` is not finite"),
        });
    }
    Ok(v)
}

/// Reads a trajectory CSV and groups it into contiguous per-vehicle tracks.
///
/// A jump of more than one sample interval in a vehicle's record starts a
/// new track. Off-grid timestamps and duplicate samples are errors.
pub fn parse_trajectories<R: Read>(source: R, schema: &ColumnSchema) -> Result<TrajectorySet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    // A zero-byte stream has no header at all; treat it like a header-only file.
    if headers.is_empty() {
        return Ok(TrajectorySet::default());
    }
    let cols = Columns::resolve(&headers, schema)?;

    let mut by_vehicle: BTreeMap<String, Vec<(i64, TrajectorySample)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let vehicle_id = field(&record, cols.vehicle_id, &schema.vehicle_id, line)?.to_string();
        let t = number(&record, cols.time, &schema.time, line)?;
        let lane_raw = field(&record, cols.lane, &schema.lane, line)?;
        let lane: i32 = lane_raw
            .parse()
            .or_else(|_| {
                lane_raw
                    .parse::<f64>()
                    .ok()
                    .filter(|f| f.fract() == 0.0)
                    .map(|f| f as i32)
                    .ok_or(())
            })
            .map_err(|_| Error::MalformedRow {
                line,
                message: format!("`{}` is not an integer lane: {lane_raw:?}", schema.lane),
            })?;
        let x = number(&record, cols.x, &schema.x, line)?;
        let v = number(&record, cols.speed, &schema.speed, line)?;
        let a = number(&record, cols.accel, &schema.accel, line)?;
        let class_raw = field(&record, cols.class, &schema.class, line)?;
        let vclass = VehicleClass::parse(class_raw).ok_or_else(|| Error::MalformedRow {
            line,
            message: format!("unknown vehicle class {class_raw:?}"),
        })?;
        let length = number(&record, cols.length, &schema.length, line)?;
        if v < 0.0 {
            return Err(Error::MalformedRow {
                line,
                message: format!("negative speed {v}"),
            });
        }
        if length <= 0.0 {
            return Err(Error::MalformedRow {
                line,
                message: format!("non-positive length {length}"),
            });
        }
        let tick = to_tick(t).ok_or_else(|| Error::Cadence {
            vehicle: vehicle_id.clone(),
            first: t,
            second: t,
        })?;
        by_vehicle.entry(vehicle_id.clone()).or_default().push((
            tick,
            TrajectorySample {
                vehicle_id,
                t: tick_time(tick),
                lane,
                x,
                v,
                a,
                vclass,
                length,
            },
        ));
    }

    let mut tracks = Vec::new();
    for (vehicle_id, mut rows) in by_vehicle {
        rows.sort_by_key(|(tick, _)| *tick);
        let mut current: Option<VehicleTrack> = None;
        let mut prev_tick = i64::MIN;
        for (tick, sample) in rows {
            if tick == prev_tick {
                return Err(Error::DuplicateSample {
                    vehicle: vehicle_id,
                    time: sample.t,
                });
            }
            let contiguous = prev_tick != i64::MIN && tick == prev_tick + 1;
            prev_tick = tick;
            match current.as_mut() {
                Some(track) if contiguous => track.samples.push(sample),
                _ => {
                    tracks.extend(current.take());
                    current = Some(VehicleTrack {
                        vehicle_id: vehicle_id.clone(),
                        vclass: sample.vclass,
                        start_tick: tick,
                        samples: vec![sample],
                    });
                }
            }
        }
        tracks.extend(current);
    }
    Ok(TrajectorySet { tracks })
}

pub fn parse_trajectories_path(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<TrajectorySet> {
    let file = std::fs::File::open(path)?;
    parse_trajectories(std::io::BufReader::new(file), schema)
}
