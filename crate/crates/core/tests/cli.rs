use std::fs;
use std::process::{Command, Output};

use sdr_planner::fixtures::FIXTURES_ENV;
use serde_json::Value;

fn planner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdr-planner"))
        .args(args)
        .env_remove(FIXTURES_ENV)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn lunch_json() -> Value {
    serde_json::from_str(sdr_planner::fixtures::bundled("manhattan_lunch.json").unwrap()).unwrap()
}

#[test]
fn plan_single_leg_average_cost() {
    let o = planner(&["plan", "manhattan_lunch.json", "--set", "policy.convention=single_leg", "--output", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ac = v["plan"]["average_cost"].as_f64().unwrap();
    assert!((ac - 0.45).abs() <= 0.01, "{ac}");
    assert_eq!(v["kkt"]["passed"], Value::Bool(true));
}

#[test]
fn plan_text_mentions_fleet() {
    let o = planner(&["plan", "manhattan_lunch.json"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("fleet size        22.37"), "{}", stdout(&o));
}

#[test]
fn compare_depots_sum_row() {
    let o = planner(&["compare-depots", "table1.json", "--output", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,area_sq_mi,orders,fleet_size,total_cost,average_cost"));
    let sum = text.lines().find(|l| l.starts_with("Sum,")).unwrap();
    let fields: Vec<&str> = sum.split(',').collect();
    assert_eq!(fields[3], "18.33");
}

#[test]
fn negative_speed_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = lunch_json();
    doc["robot"]["speed_mph"] = Value::from(-4.0);
    let path = dir.path().join("broken.json");
    fs::write(&path, doc.to_string()).unwrap();
    let o = planner(&["plan", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("speed"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_field_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = lunch_json();
    doc["robot"]["colour"] = Value::from("red");
    let path = dir.path().join("extra.json");
    fs::write(&path, doc.to_string()).unwrap();
    let o = planner(&["plan", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn missing_file_and_bad_arguments_exit_1() {
    assert_eq!(planner(&["plan", "/nonexistent/x.json"]).status.code(), Some(1));
    assert_eq!(planner(&["plan"]).status.code(), Some(1));
    assert_eq!(planner(&["frobnicate"]).status.code(), Some(1));
    let o = planner(&["sweep", "manhattan_lunch.json", "--param", "colour", "--from", "1", "--to", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_and_version_exit_0() {
    let o = planner(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("compare-depots"));
    assert!(planner(&["--version"]).status.success());
}

#[test]
fn sweep_json_is_monotone_in_share() {
    let o = planner(&[
        "sweep",
        "manhattan_lunch.json",
        "--param",
        "demand_share",
        "--from",
        "0.02",
        "--to",
        "0.2",
        "--steps",
        "10",
        "--output",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert_eq!(v["average_cost_trend"], Value::from("decreasing"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["--seed", "5", "--output", "json", "validate-ca", "--orders", "15", "--trials", "30"];
    let a = planner(&args);
    let b = planner(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let c = planner(&["--seed", "6", "--output", "json", "validate-ca", "--orders", "15", "--trials", "30"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn reproduce_passes_and_fixture_override_is_used() {
    let o = planner(&["reproduce"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));

    // a slower robot in the override directory breaks the reproduction
    let dir = tempfile::tempdir().unwrap();
    let mut doc = lunch_json();
    doc["robot"]["speed_mph"] = Value::from(3.0);
    fs::write(dir.path().join("manhattan_lunch.json"), doc.to_string()).unwrap();
    fs::write(
        dir.path().join("table1.json"),
        sdr_planner::fixtures::bundled("table1.json").unwrap(),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sdr-planner"))
        .arg("reproduce")
        .env(FIXTURES_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}
