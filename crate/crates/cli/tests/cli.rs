mod common;

use std::fs;

use common::{run, run_ok, scene, PLAIN_HEADER, TGSIM_HEADER, TGSIM_SCHEMA};
use driftlane::numeric::normal_cdf;
use driftlane::trajectory::StartEvent;
use driftlane::{DdmParams, Outcome, TrajectoryPair};
use tempfile::tempdir;

fn read_pairs(path: &std::path::Path) -> Vec<TrajectoryPair> {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn extract_finds_one_pair_per_group() {
    let dir = tempdir().unwrap();
    let s = scene(7, 12, PLAIN_HEADER);
    fs::write(dir.path().join("traj.csv"), &s.csv).unwrap();
    run_ok(
        dir.path(),
        &["extract", "--input", "traj.csv", "--out", "pairs.json"],
    );
    let pairs = read_pairs(&dir.path().join("pairs.json"));
    for (hv, car, changes) in &s.groups {
        let found: Vec<_> = pairs
            .iter()
            .filter(|p| &p.hv_id == hv && &p.car_id == car)
            .collect();
        assert_eq!(found.len(), 1, "{hv}/{car}");
        assert_eq!(found[0].t0, 0.0);
        assert_eq!(found[0].outcome.is_lane_change(), *changes);
        assert_eq!(found[0].lanes_available.len(), 2);
    }
    // Any other pair is a vehicle from an upstream group that became the
    // follower after the group's car left, or by changing lanes itself.
    let extra = pairs
        .iter()
        .filter(|p| !s.groups.iter().any(|(h, c, _)| h == &p.hv_id && c == &p.car_id));
    for p in extra {
        assert!(
            p.steps[0].g_hv > 200.0,
            "{}/{} gap {}",
            p.hv_id,
            p.car_id,
            p.steps[0].g_hv
        );
        assert!(matches!(
            p.start_event,
            StartEvent::IntermediateLeft | StartEvent::CentralLaneChange
        ));
    }
}

#[test]
fn schema_mapping_from_config() {
    let dir = tempdir().unwrap();
    let s = scene(8, 6, TGSIM_HEADER);
    fs::write(dir.path().join("traj.csv"), &s.csv).unwrap();
    fs::write(
        dir.path().join("run.json"),
        format!(r#"{{"input": "traj.csv", "schema": {TGSIM_SCHEMA}}}"#),
    )
    .unwrap();
    run_ok(
        dir.path(),
        &["--config", "run.json", "extract", "--out", "pairs.json"],
    );
    fs::write(dir.path().join("plain.csv"), scene(8, 6, PLAIN_HEADER).csv).unwrap();
    run_ok(
        dir.path(),
        &["extract", "--input", "plain.csv", "--out", "plain.json"],
    );
    let (a, b) = (
        read_pairs(&dir.path().join("pairs.json")),
        read_pairs(&dir.path().join("plain.json")),
    );
    assert!(a.len() >= s.groups.len());
    assert_eq!(a, b);

    // Without the mapping the first required column is missing.
    let out = run(dir.path(), &["extract", "--input", "traj.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vehicle_id"));
}

#[test]
fn flags_override_config() {
    let dir = tempdir().unwrap();
    let s = scene(9, 6, PLAIN_HEADER);
    fs::write(dir.path().join("traj.csv"), &s.csv).unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"input": "traj.csv", "extract": {"min_duration": 100.0}}"#,
    )
    .unwrap();
    run_ok(
        dir.path(),
        &["--config", "run.json", "extract", "--out", "a.json"],
    );
    assert!(read_pairs(&dir.path().join("a.json")).is_empty());
    run_ok(
        dir.path(),
        &[
            "--config",
            "run.json",
            "extract",
            "--min-duration",
            "5",
            "--out",
            "b.json",
        ],
    );
    assert!(read_pairs(&dir.path().join("b.json")).len() >= s.groups.len());
}

#[test]
fn input_errors_exit_with_2() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "vehicle_id,time_s,x_m\n1,0.0,3.0\n").unwrap();
    let out = run(dir.path(), &["extract", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`lane`"));

    assert_eq!(
        run(dir.path(), &["extract", "--input", "missing.csv"])
            .status
            .code(),
        Some(2)
    );

    fs::write(dir.path().join("run.json"), r#"{"sede": 3}"#).unwrap();
    let out = run(
        dir.path(),
        &["--config", "run.json", "extract", "--input", "bad.csv"],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = std::process::Command::new(common::BIN)
        .current_dir(dir.path())
        .env("DRIFTLANE_THREADS", "0")
        .args(["synth", "--n-pairs", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_input_gives_empty_array() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = run_ok(dir.path(), &["extract", "--input", "empty.csv"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[]");
    fs::write(dir.path().join("header.csv"), PLAIN_HEADER.join(",") + "\n").unwrap();
    let out = run_ok(dir.path(), &["extract", "--input", "header.csv"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[]");
}

/// A pair whose environment is constant for 60 s.
fn constant_pair(two_sided: bool) -> TrajectoryPair {
    let dir = tempdir().unwrap();
    let out = run_ok(dir.path(), &["synth", "--n-pairs", "1", "--seed", "4"]);
    let mut pair = serde_json::from_slice::<Vec<TrajectoryPair>>(&out.stdout)
        .unwrap()
        .remove(0);
    let mut first = pair.steps[0].clone();
    first.neighbors.truncate(1);
    first.neighbors[0].delta_g = 0;
    if two_sided {
        let mut other = first.neighbors[0].clone();
        other.direction = other.direction.opposite();
        first.neighbors.push(other);
    }
    pair.lanes_available = first.neighbors.iter().map(|n| n.direction).collect();
    pair.lanes_available.sort_by_key(|d| d.sign());
    pair.steps = (0..=600)
        .map(|i| {
            let mut s = first.clone();
            s.t = i as f64 / 10.0;
            s
        })
        .collect();
    pair.tmax = 60.0;
    pair.outcome = Outcome::Censored;
    pair
}

fn series_blocks(csv: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut blocks: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let point = (f[4].parse().unwrap(), f[7].parse().unwrap());
        match blocks.last_mut() {
            Some((d, pts)) if d == f[2] => pts.push(point),
            _ => blocks.push((f[2].to_string(), vec![point])),
        }
    }
    blocks
}

#[test]
fn predict_matches_inverse_gaussian_on_constant_environment() {
    let dir = tempdir().unwrap();
    let pair = constant_pair(false);
    fs::write(
        dir.path().join("pairs.json"),
        serde_json::to_string(&[&pair]).unwrap(),
    )
    .unwrap();
    // Drift reduces to beta0 = 0.5; alpha = 0 puts the start at 10.
    fs::write(
        dir.path().join("params.json"),
        r#"{"alpha": 0.0, "beta0": 0.5, "beta1": 0.0, "beta2": 0.0, "beta3": 0.0, "g_f0": 16.0, "sigma": 1.0}"#,
    )
    .unwrap();
    let out = run_ok(
        dir.path(),
        &["predict", "--pairs", "pairs.json", "--params", "params.json"],
    );
    let blocks = series_blocks(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(blocks.len(), 1);
    let ig = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let s = t.sqrt();
        normal_cdf((0.5 * t - 10.0) / s) + (10.0f64).exp() * normal_cdf((-0.5 * t - 10.0) / s)
    };
    let sup = blocks[0]
        .1
        .iter()
        .map(|&(t, f)| (f - ig(t)).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 5e-3, "sup error {sup}");
}

fn write_reference_params(dir: &std::path::Path) {
    fs::write(
        dir.join("params.json"),
        serde_json::to_string(&DdmParams::reference()).unwrap(),
    )
    .unwrap();
}

#[test]
fn identical_sides_give_identical_blocks() {
    let dir = tempdir().unwrap();
    write_reference_params(dir.path());
    fs::write(
        dir.path().join("pairs.json"),
        serde_json::to_string(&[constant_pair(true)]).unwrap(),
    )
    .unwrap();
    let out = run_ok(
        dir.path(),
        &[
            "predict",
            "--pairs",
            "pairs.json",
            "--params",
            "params.json",
            "--summary",
            "summary.csv",
        ],
    );
    let blocks = series_blocks(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(blocks.len(), 2);
    assert_eq!((blocks[0].0.as_str(), blocks[1].0.as_str()), ("left", "right"));
    assert_eq!(blocks[0].1, blocks[1].1);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = summary.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][4..], rows[1][4..]);
}

#[test]
fn predict_rejects_step_mismatch() {
    let dir = tempdir().unwrap();
    let mut p = DdmParams::reference();
    p.dt = 0.05;
    fs::write(dir.path().join("params.json"), serde_json::to_string(&p).unwrap()).unwrap();
    fs::write(
        dir.path().join("pairs.json"),
        serde_json::to_string(&[constant_pair(false)]).unwrap(),
    )
    .unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"fit": {"allow_constant_override": true}}"#,
    )
    .unwrap();
    let out = run(
        dir.path(),
        &[
            "--config",
            "run.json",
            "predict",
            "--pairs",
            "pairs.json",
            "--params",
            "params.json",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Without the override the constant itself is rejected.
    let out = run(
        dir.path(),
        &["predict", "--pairs", "pairs.json", "--params", "params.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_renders_parameter_table_and_clusters() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("traj.csv"), scene(21, 30, PLAIN_HEADER).csv).unwrap();
    run_ok(d, &["extract", "--input", "traj.csv", "--out", "pairs.json"]);
    run_ok(d, &["cluster", "--pairs", "pairs.json", "--out", "clusters.json"]);
    run_ok(
        d,
        &[
            "fit",
            "--pairs",
            "pairs.json",
            "--max-iter",
            "5",
            "--out",
            "fit.json",
        ],
    );
    let out = run_ok(
        d,
        &[
            "report",
            "--fit",
            "fit.json",
            "--clusters",
            "clusters.json",
            "--json",
            "report.json",
        ],
    );
    let text = String::from_utf8_lossy(&out.stdout);
    for name in DdmParams::FREE_NAMES {
        assert_eq!(text.lines().filter(|l| l.starts_with(name)).count(), 1, "{text}");
    }
    let n = read_pairs(&d.join("pairs.json")).len();
    assert!(text.contains(&format!("Sample size      {n}\n")), "{text}");
    assert!(text.contains("Log-likelihood"));
    assert!(text.contains("misassigned"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["fit"]["parameters"].as_array().unwrap().len(), 7);
    let c = &json["clusters"]["centers"];
    assert!(c[0].as_f64().unwrap() <= c[1].as_f64().unwrap());
}

#[test]
fn report_with_no_misassigned_pairs() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let clusters = serde_json::json!({
        "weights": {"gamma1": 0.0, "gamma2": 0.0},
        "centers": [1.0, 5.0],
        "sizes": [2, 1],
        "within_sse": 0.5,
        "assignments": [1, 1, 2],
        "diagnostics": {
            "baseline_sse": 0.5,
            "lane_changes_per_cluster": [0, 1],
            "intention_cluster": 2,
            "intention_members": [2],
            "misassigned": [],
            "weight_inference": {"heuristic": true, "std_errors": null, "t_scores": null, "p_values": null}
        }
    });
    fs::write(d.join("clusters.json"), clusters.to_string()).unwrap();
    let out = run_ok(d, &["report", "--clusters", "clusters.json"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 misassigned"));
    assert_eq!(run(d, &["report"]).status.code(), Some(2));
}

#[test]
fn simulate_summary_checkpoints() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    run_ok(
        d,
        &[
            "simulate",
            "--drift",
            "0.5",
            "--n-paths",
            "4000",
            "--seed",
            "2",
            "--horizon",
            "30",
            "--out",
            "t.csv",
            "--summary",
            "s.json",
        ],
    );
    let s: serde_json::Value = serde_json::from_slice(&fs::read(d.join("s.json")).unwrap()).unwrap();
    let cps = s["checkpoints"].as_array().unwrap();
    assert_eq!(cps.len(), 6);
    for cp in cps {
        let mc = cp["monte_carlo_cdf"].as_f64().unwrap();
        let se = cp["binomial_std_error"].as_f64().unwrap().max(1e-3);
        assert!(
            (mc - cp["recursion_cdf"].as_f64().unwrap()).abs() < 4.0 * se,
            "{cp}"
        );
    }
    assert_eq!(fs::read_to_string(d.join("t.csv")).unwrap().lines().count(), 4001);
}

#[test]
fn full_config_is_accepted() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("tgsim_i395.csv"), scene(3, 3, TGSIM_HEADER).csv).unwrap();
    let cfg = format!(
        r#"{{
  "input": "tgsim_i395.csv",
  "schema": {TGSIM_SCHEMA},
  "extract": {{ "lanes": [3, 4, 5], "min_duration": 5.0, "orientation": "increasing-right" }},
  "cluster": {{ "start": {{ "gamma1": 0.0, "gamma2": 0.0 }}, "search": {{ "grid": [-100, -50, 0, 50, 100] }} }},
  "fit": {{ "p0": {{ "alpha": 0.3, "beta0": 0.0, "beta1": 0.1, "beta2": 0.1, "beta3": 0.5, "g_f0": 15.0, "sigma": 2.0 }},
           "bfgs": {{ "max_iter": 300, "gtol": 1e-3 }}, "p_values": "normal" }},
  "convention": "density",
  "seed": 1,
  "simulate": {{ "n_paths": 100000, "horizon": 60.0, "crossing": "bridge" }}
}}"#
    );
    fs::write(d.join("run.json"), cfg).unwrap();
    run_ok(d, &["--config", "run.json", "extract", "--out", "pairs.json"]);
    assert!(read_pairs(&d.join("pairs.json")).len() >= 3);
}
