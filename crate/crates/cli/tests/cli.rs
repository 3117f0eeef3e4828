use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tandem::scenario::{load_scenario, Layer};

fn tandem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tandem")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_scenario(dir: &Path) -> PathBuf {
    let path = dir.join("small.json");
    let o = tandem(&["gen", "--preset", "small", "--seed", "3", "-o", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn gen_dt_like_has_expected_layers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dt.json");
    let o = tandem(&["gen", "--preset", "dt-like", "-o", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("coverage cells: 15 (773 MHz)"), "{}", stdout(&o));
    let s = load_scenario(&path).unwrap();
    assert_eq!(s.cells.len(), 60);
    assert_eq!(s.count_layer(Layer::Coverage), 15);
    assert_eq!(s.count_layer(Layer::Capacity), 45);
    let mut carriers: Vec<u64> = s.cells.iter().map(|c| c.carrier_hz as u64).collect();
    carriers.sort_unstable();
    carriers.dedup();
    assert_eq!(carriers.len(), 3);
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        assert!(tandem(&["gen", "--seed", "7", "-o", p(path)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_zero_sites() {
    let dir = tempfile::tempdir().unwrap();
    let o = tandem(&["gen", "--sites", "0", "-o", p(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("site"), "{}", stderr(&o));
}

#[test]
fn gen_reduces_to_desk_scale() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("desk.json");
    let o = tandem(&["gen", "--max-cells", "20", "-o", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = load_scenario(&path).unwrap();
    assert!(s.cells.len() <= 20 && s.count_layer(Layer::Coverage) >= 1);
}

#[test]
fn bad_arguments_exit_with_validation_code() {
    assert_eq!(tandem(&["run"]).status.code(), Some(1));
    assert_eq!(tandem(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tandem(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_without_controllers_reports_no_state_changes() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let out = dir.path().join("out");
    let o = tandem(&["run", p(&scenario), "--horizon", "600", "--no-xapp", "--no-rapp", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("state changes: 0 (0 forced)"), "{}", stdout(&o));
    for f in ["timeseries.csv", "events.csv", "msglog.ndjson", "policies.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let ts = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(ts.lines().count(), 11);
    assert!(ts.starts_with("t_s,beta_sys_pct,alpha_off,alpha_on,n_off,power_w,n_ues,offered_bps"));
}

#[test]
fn target_band_reaches_policy_log() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let out = dir.path().join("out");
    let o = tandem(&[
        "run", p(&scenario), "--horizon", "1200", "--target-outage", "15", "--tolerance", "1", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let policies = std::fs::read_to_string(out.join("policies.csv")).unwrap();
    let mut lines = policies.lines().skip(1);
    assert_eq!(lines.next(), Some("0,0,100,14,16"));
    for line in lines {
        assert!(line.ends_with(",14,16"), "{line}");
    }
    let log = std::fs::read_to_string(out.join("msglog.ndjson")).unwrap();
    for line in log.lines().filter(|l| l.contains("\"policy\"")) {
        assert!(line.contains("\"target_outage_lo\":14.0") && line.contains("\"target_outage_hi\":16.0"), "{line}");
    }
}

#[test]
fn invalid_run_config_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"t_x_s": 600, "w_pp_s": 10}"#).unwrap();
    let o = tandem(&["run", p(&scenario), "--config", p(&cfg), "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("t_x_s") && err.contains("w_pp_s"), "{err}");

    std::fs::write(&cfg, r#"{"horizon": 5}"#).unwrap();
    let o = tandem(&["run", p(&scenario), "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_scenario_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version": 1, "area": {"width_m": -1, "height_m": 10}, "sites": [], "cells": [], "pixels": []}"#)
        .unwrap();
    assert_eq!(tandem(&["run", p(&bad)]).status.code(), Some(1));
}

#[test]
fn missing_scenario_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tandem(&["run", p(&dir.path().join("nope.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn msgstats_recounts_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let out = dir.path().join("out");
    let o = tandem(&["run", p(&scenario), "--horizon", "600", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let total: u64 = stdout(&o).lines().find_map(|l| l.strip_prefix("messages: ")).unwrap().parse().unwrap();

    let log = out.join("msglog.ndjson");
    let lines = std::fs::read_to_string(&log).unwrap().lines().count() as u64;
    assert_eq!(lines, total);
    let o = tandem(&["msgstats", p(&log), "--window", "60"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains(&format!("all interfaces {total}")), "{s}");
    assert!(s.contains("identity total = sum of kinds: holds"), "{s}");
}

#[test]
fn msgstats_reports_malformed_line() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.ndjson");
    std::fs::write(
        &log,
        "{\"t_s\":0.0,\"interface\":\"E2\",\"kind\":\"setup\",\"source\":\"e2node-0\",\"destination\":\"coos-xapp\"}\nnot json\n",
    )
    .unwrap();
    let o = tandem(&["msgstats", p(&log)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":2:"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_goal_and_reference_rows() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let csv = dir.path().join("sweep.csv");
    let o = tandem(&["sweep", p(&scenario), "--horizon", "600", "--goals", "15,5", "-o", p(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let kinds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(kinds, ["goal", "goal", "all_active", "all_capacity_off"]);
    assert!(text.lines().nth(1).unwrap().starts_with("goal,5,"));
}

#[test]
fn sweep_needs_a_goal() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let o = tandem(&["sweep", p(&scenario), "--goals", "", "-o", p(&dir.path().join("s.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}
