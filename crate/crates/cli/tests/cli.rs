use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn coordlang(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coordlang"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let o = coordlang(args, dir);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

/// gen -> rcgraph -> abstract in `dir`, returning the abstraction path.
fn build(dir: &Path, gen: &[&str], order: &str) -> PathBuf {
    let mut args = vec!["gen", "--out", "domain.json"];
    args.extend_from_slice(gen);
    ok(&args, dir);
    ok(&["rcgraph", "domain.json", "--out", "rc.json"], dir);
    let out = format!("abs-{order}.json");
    ok(&["abstract", "rc.json", "--out", &out, "--order", order], dir);
    dir.join(out)
}

#[test]
fn gen_reports_state_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (args, expected) in [
        (vec!["--domain", "grid_loop", "--w", "4", "--h", "5"], "182 states"),
        (vec!["--domain", "ring", "--n", "3"], "6 states"),
        (vec!["--domain", "turn_and_open", "--balls", "4"], "256 states"),
    ] {
        let mut full = vec!["gen"];
        full.extend(args);
        assert_eq!(ok(&full, dir.path()).trim(), expected);
    }
}

#[test]
fn gen_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = coordlang(&["gen", "--domain", "ring"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n"));
    let o = coordlang(&["gen", "--domain", "ring", "--n", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = coordlang(&["gen", "--domain", "hexagon"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn written_domain_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "gen",
            "--domain",
            "grid_loop",
            "--w",
            "2",
            "--h",
            "2",
            "--out",
            "d.json",
        ],
        dir.path(),
    );
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(v["generator"], "grid_loop");
    let out = ok(&["rcgraph", "d.json", "--out", "rc.json"], dir.path());
    assert!(out.contains("12 states"));
}

#[test]
fn ring_dot_lists_theta_with_cost_two() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["gen", "--domain", "ring", "--n", "3", "--out", "ring.json"],
        dir.path(),
    );
    let out = ok(
        &["rcgraph", "ring.json", "--out", "rc.json", "--dot", "rc.dot"],
        dir.path(),
    );
    assert!(out.contains("theta entries: 6"));
    let dot = std::fs::read_to_string(dir.path().join("rc.dot")).unwrap();
    let label = dot.lines().find(|l| l.contains("theta [")).unwrap();
    let entries: Vec<&str> = label.split("\\l").filter(|e| e.starts_with('(')).collect();
    assert_eq!(entries.len(), 6);
    assert!(entries.iter().all(|e| e.contains(") 2: (")));

    let rc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rc.json")).unwrap()).unwrap();
    let costs: Vec<u64> = rc["theta"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["cost"].as_u64().unwrap())
        .collect();
    assert_eq!(costs, vec![2; 6]);
}

#[test]
fn door_domain_without_balls_has_empty_theta() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["gen", "--domain", "turn_and_open", "--balls", "0", "--out", "d.json"],
        dir.path(),
    );
    let out = ok(&["rcgraph", "d.json", "--out", "rc.json"], dir.path());
    assert!(out.contains("theta entries: 0"));
    let out = ok(&["abstract", "rc.json", "--out", "abs.json"], dir.path());
    assert!(out.trim_end().ends_with("1 blocks"));
    for (from, to) in [("0", "9"), ("5", "3"), ("15", "0")] {
        let s: Value =
            serde_json::from_str(&ok(&["speak", "abs.json", "--from", from, "--to", to], dir.path())).unwrap();
        assert!(s["sentence"].as_array().unwrap().len() <= 1);
    }
}

#[test]
fn plan_cap_exits_with_three_and_names_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["gen", "--domain", "ring", "--n", "3", "--out", "ring.json"],
        dir.path(),
    );
    let o = coordlang(&["rcgraph", "ring.json", "--out", "rc.json", "--cap", "1"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("more than 1 optimal plans from"), "{err}");
}

#[test]
fn small_grid_gets_four_blocks() {
    let dir = tempfile::tempdir().unwrap();
    build(
        dir.path(),
        &["--domain", "grid_loop", "--w", "2", "--h", "2"],
        "saturation",
    );
    let abs: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("abs-saturation.json")).unwrap()).unwrap();
    assert_eq!(abs["blocks"].as_array().unwrap().len(), 4);
    assert_eq!(abs["words"].as_array().unwrap().len(), 4);
}

#[test]
fn both_orders_give_verified_abstractions() {
    let dir = tempfile::tempdir().unwrap();
    let gen = ["--domain", "grid_loop", "--w", "3", "--h", "3"];
    for order in ["saturation", "degree"] {
        let abs = build(dir.path(), &gen, order);
        let out = ok(
            &["abstract", "rc.json", "--out", "again.json", "--order", order],
            dir.path(),
        );
        assert!(out.contains(&format!("order: {order}")));
        assert!(out.contains(" blocks"));
        let o = coordlang(&["verify", abs.to_str().unwrap(), "--exhaustive"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains("3080 instances, 0 violations"));
    }
}

#[test]
fn speak_prints_sentence_json() {
    let dir = tempfile::tempdir().unwrap();
    let abs = build(dir.path(), &["--domain", "ring", "--n", "3"], "saturation");
    let abs = abs.to_str().unwrap();
    // States (1,2) and (2,1) carry ids 0 and 2.
    let s: Value = serde_json::from_str(&ok(&["speak", abs, "--from", "0", "--to", "2"], dir.path())).unwrap();
    assert_eq!(s["instance"], serde_json::json!([0, 2]));
    assert_eq!(s["sentence"].as_array().unwrap().len(), 1);
    let s: Value = serde_json::from_str(&ok(&["speak", abs, "--from", "4", "--to", "4"], dir.path())).unwrap();
    assert_eq!(s["sentence"], serde_json::json!([]));
    let o = coordlang(&["speak", abs, "--from", "0", "--to", "6"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_coloured_and_fails_single_block() {
    let dir = tempfile::tempdir().unwrap();
    let abs = build(dir.path(), &["--domain", "ring", "--n", "3"], "saturation");
    let o = coordlang(&["verify", abs.to_str().unwrap(), "--exhaustive"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("30 instances, 0 violations"));

    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&abs).unwrap()).unwrap();
    let all: Vec<Value> = (0..6).map(Value::from).collect();
    file["blocks"] = Value::Array(vec![Value::Array(all.clone())]);
    file["abstract_edges"] = serde_json::json!([]);
    file["words"] = serde_json::json!([{"id": 0, "members": all}]);
    std::fs::write(dir.path().join("one.json"), file.to_string()).unwrap();
    let o = coordlang(&["verify", "one.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("violation ("), "{out}");
    assert!(out.contains("30 instances, 6 violations"), "{out}");
}

#[test]
fn sampled_verification_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let abs = build(
        dir.path(),
        &["--domain", "grid_loop", "--w", "2", "--h", "2"],
        "saturation",
    );
    let args = ["verify", abs.to_str().unwrap(), "--sample", "100", "--seed", "7"];
    let first = ok(&args, dir.path());
    assert_eq!(first, ok(&args, dir.path()));
    assert!(first.contains("100 instances"));
}

#[test]
fn simulate_reports_zero_failures_with_sentences() {
    let dir = tempfile::tempdir().unwrap();
    let abs = build(dir.path(), &["--domain", "ring", "--n", "3"], "saturation");
    let out = ok(&["simulate", abs.to_str().unwrap(), "--csv", "sim.csv"], dir.path());
    assert!(out.contains("with sentences: 30 instances"));
    assert!(out.contains(" 0 failures, 0 skipped"));
    let baseline = out.lines().next().unwrap();
    assert!(!baseline.contains(" 0 failures"), "{baseline}");
    let csv = std::fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn missing_or_malformed_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = coordlang(&["verify", "absent.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.json"));
    std::fs::write(
        dir.path().join("bad.json"),
        "{\"generator\": \"ring\", \"params\": {\"m\": 3}}",
    )
    .unwrap();
    let o = coordlang(&["rcgraph", "bad.json", "--out", "rc.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json"));
}

#[test]
fn bench_writes_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = coordlang(
        &["bench", "--suite", "paper-table1", "--out", "t.csv", "--only", "#1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "problem,pairs,states,abs_states,time_s");
    assert!(lines[1].starts_with("T&O #1,240,16,1,"));
    assert!(lines[2].starts_with("GW #1,132,12,4,"));
    assert_eq!(lines.len(), 3);
}
