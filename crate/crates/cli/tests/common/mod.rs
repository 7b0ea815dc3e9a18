//! Synthetic multi-lane trajectory scenes and helpers for driving the binary.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use driftlane::rng::keyed_rng;
use rand::Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_driftlane");

/// Column names in the style of the TGSIM I-395 release.
pub const TGSIM_HEADER: [&str; 8] = [
    "id",
    "time",
    "lane_kf",
    "xloc_kf",
    "speed_kf",
    "acceleration_kf",
    "type_most_common",
    "length_smoothed",
];

pub const PLAIN_HEADER: [&str; 8] = [
    "vehicle_id",
    "time_s",
    "lane",
    "x_m",
    "speed_mps",
    "accel_mps2",
    "class",
    "length_m",
];

/// Schema block of a run config mapping the TGSIM-style names.
pub const TGSIM_SCHEMA: &str = r#"{
  "vehicle_id": "id", "time": "time", "lane": "lane_kf", "x": "xloc_kf",
  "speed": "speed_kf", "accel": "acceleration_kf", "class": "type_most_common",
  "length": "length_smoothed"
}"#;

pub struct Scene {
    pub csv: String,
    /// (hv id, car id, changes lane) of each group.
    pub groups: Vec<(String, String, bool)>,
}

/// One heavy vehicle per group with a car following it at an oscillating
/// gap; some cars change lanes. Each group also has one car in every
/// adjacent lane drifting relative to the follower. Groups are 600 m apart
/// so they interact only through long-range following: once a group's car
/// leaves, the nearest upstream vehicle in that lane follows its HV.
pub fn scene(seed: u64, groups: usize, header: [&str; 8]) -> Scene {
    let mut csv = header.join(",");
    csv.push('\n');
    let mut pairs = Vec::new();
    let ticks = 400;
    let mut id = 1000;
    let row =
        |csv: &mut String, id: u32, tick: i64, lane: i32, x: f64, v: f64, a: f64, class: &str, len: f64| {
            writeln!(
                csv,
                "{id},{:.1},{lane},{x:.6},{v:.6},{a:.6},{class},{len}",
                tick as f64 / 10.0
            )
            .unwrap();
        };
    for g in 0..groups {
        let mut rng = keyed_rng(&[seed, g as u64]);
        let lane = 3 + (g % 3) as i32;
        let base = 600.0 * g as f64;
        let v: f64 = rng.random_range(18.0..24.0);
        let g0: f64 = rng.random_range(8.0..35.0);
        let amp: f64 = rng.random_range(0.0..6.0);
        let omega: f64 = rng.random_range(0.2..1.0);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let change = rng.random_bool(0.6).then(|| {
            let d = if rng.random_bool(0.5) { -1 } else { 1 };
            (rng.random_range(60..350i64), d)
        });
        let (hv, car) = (id, id + 1);
        id += 2;
        pairs.push((hv.to_string(), car.to_string(), change.is_some()));
        for tick in 0..=ticks {
            let t = tick as f64 / 10.0;
            let x_hv = base + 300.0 + v * t;
            row(&mut csv, hv, tick, lane, x_hv, v, 0.0, "truck", 16.0);
            let s = omega * t + phase;
            let gap = g0 + amp * s.sin();
            let car_lane = match change {
                Some((at, d)) if tick >= at => lane + d,
                _ => lane,
            };
            let speed = v - amp * omega * s.cos();
            let accel = amp * omega * omega * s.sin();
            row(
                &mut csv,
                car,
                tick,
                car_lane,
                x_hv - 16.0 - gap,
                speed,
                accel,
                "car",
                4.5,
            );
        }
        for side in [-1, 1] {
            let adj = id;
            id += 1;
            let lead = rng.random_bool(0.5);
            let offset: f64 = rng.random_range(5.0..40.0);
            let dv: f64 = rng.random_range(-1.5..1.5);
            for tick in 0..=ticks {
                let t = tick as f64 / 10.0;
                let x_car0 = base + 300.0 - 16.0 - g0;
                let x = if lead {
                    x_car0 + 4.5 + offset
                } else {
                    x_car0 - 4.5 - offset
                } + (v + dv) * t;
                row(&mut csv, adj, tick, lane + side, x, v + dv, 0.0, "car", 4.5);
            }
        }
    }
    Scene { csv, groups: pairs }
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn driftlane")
}

pub fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "driftlane {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}
