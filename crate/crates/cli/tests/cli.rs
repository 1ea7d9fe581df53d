use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn net(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../nets").join(name)
}

fn cfnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfnet")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn iomap_four_node_is_weight_difference() {
    let out = cfnet(&["iomap", "--net", path(&net("four_node.json")), "--from", "1", "--to", "4", "--degree", "5"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["tool"], "cfnet");
    assert_eq!(doc["command"], "iomap");
    assert_eq!(doc["input_sha256"].as_str().unwrap().len(), 64);
    // W42 W21 - W43 W31 with weights 2, 3, 5, 7.
    let terms = doc["result"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["word"], serde_json::json!([0, 0, 1]));
    assert_eq!(terms[0]["coeff"], (5 * 2 - 7 * 3).to_string());
}

#[test]
fn abel_csv_rows() {
    let out = cfnet(&["abel", "--m", "1", "--K", "1", "--M", "1", "--n", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let a: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(a, ["1", "2", "10", "82", "938", "13778", "247210"]);
}

#[test]
fn double_diamond_sink_degree_seven() {
    let out = cfnet(&["reldeg", "--net", path(&net("double_diamond.json")), "--from", "1", "--to", "7", "--degree", "7", "--require-certified"]);
    assert!(out.status.success());
    let r = &json(&out)["result"];
    assert_eq!(r["predicted"], 7);
    assert_eq!(r["measured"], 7);
    assert_eq!(r["condition"], "distinct");
}

#[test]
fn uncertified_request_is_a_domain_error() {
    // Nodes 2 and 3 are not connected.
    let out = cfnet(&["reldeg", "--net", path(&net("four_node.json")), "--from", "2", "--to", "3", "--degree", "4", "--require-certified"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "uncertified");
}

#[test]
fn usage_errors_exit_two() {
    let missing = cfnet(&["iomap", "--net", "/nonexistent/net.json", "--from", "1", "--to", "2", "--degree", "3"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
    let no_seed = cfnet(&["montecarlo", "--net", path(&net("four_node.json"))]);
    assert_eq!(no_seed.status.code(), Some(2));
    let unknown = cfnet(&["bounds", "--m", "3", "--K", "1", "--M", "1", "--colour", "red"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn malformed_network_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"m": 2, "W": [["0"]], "nodes": []}"#).unwrap();
    let out = cfnet(&["iomap", "--net", bad.to_str().unwrap(), "--from", "1", "--to", "1", "--degree", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"]["message"].is_string());
}

#[test]
fn montecarlo_is_deterministic_across_job_counts() {
    let run = |jobs: &str| {
        let out = cfnet(&[
            "montecarlo", "--net", path(&net("four_node.json")), "--seed", "11", "--samples", "200",
            "--from", "1", "--to", "4", "--word", "x0 x0 x1", "--jobs", jobs,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
    let doc: Value = serde_json::from_slice(&one).unwrap();
    let pair = doc["result"]["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["from"] == 1 && p["to"] == 4)
        .unwrap();
    assert_eq!(pair["defined"]["3"], 200);
}

#[test]
fn simulate_writes_trajectory_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("traj.csv");
    let out = cfnet(&["simulate", "--net", path(&net("all_ones3.json")), "--T", "0.2", "--out", out_csv.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_csv).unwrap();
    assert!(csv.lines().any(|l| l == "t,y_1,y_2,y_3"));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("traj.json")).unwrap()).unwrap();
    let escape = side["result"]["escape_time"].as_f64().unwrap();
    assert!((escape - 0.1379).abs() < 0.02 * 0.1379, "escape {escape}");
    assert_eq!(side["result"]["threshold"], 1e9);
    assert!(side["result"]["integrator"].is_string());
}

#[test]
fn bounds_from_network_and_constants_agree() {
    let a = json(&cfnet(&["bounds", "--net", path(&net("three_node_maximal.json"))]));
    let b = json(&cfnet(&["bounds", "--m", "3", "--K", "3", "--M", "4"]));
    assert_eq!(a["result"], b["result"]);
    assert!((a["result"]["M_inf"].as_f64().unwrap() - 77.2867).abs() < 1e-4);
}

#[test]
fn every_subcommand_has_a_schema() {
    for name in ["iomap", "reldeg", "bounds", "abel", "simulate", "montecarlo", "validate"] {
        let out = cfnet(&["schema", name]);
        assert!(out.status.success(), "{name}");
        assert_eq!(json(&out)["type"], "object");
        assert!(cfnet(&[name, "--help"]).status.success());
    }
}
