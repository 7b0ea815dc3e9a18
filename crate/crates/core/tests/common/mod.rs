//! Hand-built trajectory fixtures.
#![allow(dead_code)]

use std::fmt::Write;

pub const HEADER: &str = "vehicle_id,time_s,lane,x_m,speed_mps,accel_mps2,class,length_m\n";

/// A vehicle at constant speed whose lane follows a step schedule.
pub struct Vehicle {
    pub id: &'static str,
    pub class: &'static str,
    pub length: f64,
    pub x0: f64,
    pub speed: f64,
    /// Inclusive tick range of the record.
    pub ticks: (i64, i64),
    /// (first tick, lane) in ascending order.
    pub lanes: Vec<(i64, i32)>,
}

impl Vehicle {
    pub fn new(id: &'static str, class: &'static str, length: f64, x0: f64, speed: f64) -> Self {
        Self {
            id,
            class,
            length,
            x0,
            speed,
            ticks: (0, 300),
            lanes: vec![],
        }
    }

    pub fn ticks(mut self, first: i64, last: i64) -> Self {
        self.ticks = (first, last);
        self
    }

    pub fn lane_from(mut self, tick: i64, lane: i32) -> Self {
        self.lanes.push((tick, lane));
        self
    }

    fn lane_at(&self, tick: i64) -> i32 {
        self.lanes
            .iter()
            .rev()
            .find(|(t, _)| *t <= tick)
            .map(|(_, l)| *l)
            .expect("lane schedule")
    }

    pub fn x_at(&self, tick: i64) -> f64 {
        self.x0 + self.speed * tick as f64 / 10.0
    }

    pub fn rows(&self, out: &mut String) {
        for tick in self.ticks.0..=self.ticks.1 {
            writeln!(
                out,
                "{},{:.1},{},{:.4},{:.4},0.0,{},{}",
                self.id,
                tick as f64 / 10.0,
                self.lane_at(tick),
                self.x_at(tick),
                self.speed,
                self.class,
                self.length
            )
            .unwrap();
        }
    }
}

pub fn csv(vehicles: &[Vehicle]) -> String {
    let mut out = String::from(HEADER);
    for v in vehicles {
        v.rows(&mut out);
    }
    out
}

/// Car joins the HV lane by lane change at t = 3 s and leaves to the left at
/// t = 20.1 s. Lane 2 holds a follower exactly 20 m behind the car and a
/// leader pulling away at 0.5 m/s.
pub fn lane_change_fixture() -> Vec<Vehicle> {
    vec![
        Vehicle::new("H", "heavy_vehicle", 15.0, 100.0, 20.0).lane_from(0, 3),
        Vehicle::new("C", "car", 4.5, 60.0, 20.0)
            .lane_from(0, 4)
            .lane_from(30, 3)
            .lane_from(201, 2),
        // Car rear is at 55.5 + 20 t; this follower's front is 20 m behind.
        Vehicle::new("F", "car", 4.5, 35.5, 20.0).lane_from(0, 2),
        Vehicle::new("L", "car", 4.5, 100.0, 20.5).lane_from(0, 2),
    ]
}

use driftlane::PairFeatures;

/// Two groups with overlapping mean gaps whose normalized spread is an exact
/// affine function of the gap; `gamma1 = -40` collapses each group to a point
/// (20 for the first, -40 for the second).
pub fn separable_features(per_group: usize) -> Vec<PairFeatures> {
    let mut out = Vec::with_capacity(2 * per_group);
    for k in 0..per_group {
        let u = k as f64 / (per_group - 1) as f64;
        let ga = 20.0 + 40.0 * u;
        let gb = 40.0 + 40.0 * u;
        let a = PairFeatures {
            duration: 1.0,
            mean_gap: ga,
            std_gap: (ga - 20.0) / 40.0,
            mean_a_car: 0.1,
            mean_a_hv: 0.1,
        };
        let b = PairFeatures {
            duration: 1.0,
            mean_gap: gb,
            std_gap: (gb - 40.0) / 40.0 + 2.0,
            mean_a_car: 0.1,
            mean_a_hv: 0.1,
        };
        out.push(a);
        out.push(b);
    }
    out
}
