use std::process::Command;

use robust_tnep::report::{rows_from_csv, ResultDocument, ResultRow, SweepRow};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-tnep"))
}

#[test]
fn solve_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("toy2.json");
    let status = bin().args(["solve", "--case", "toy2", "--gamma-d", "1", "--out"]).arg(&json).status().unwrap();
    assert!(status.success());
    let doc = ResultDocument::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(doc.converged);
    assert_eq!(doc.gamma_demand, 1);
    assert_eq!(doc.worst_case_label, "D:1 G:0 W:");

    let out = bin().args(["solve", "--case", "toy2", "--format", "csv"]).output().unwrap();
    assert!(out.status.success());
    let rows: Vec<ResultRow> = rows_from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].outer_iterations, 1);
}

#[test]
fn repeated_solves_agree_apart_from_timing() {
    let run = || {
        let out = bin().args(["solve", "--case", "toy3", "--gamma-d", "1", "--gamma-w", "1"]).output().unwrap();
        ResultDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap().without_timing()
    };
    assert_eq!(run(), run());
}

#[test]
fn sweep_keeps_one_row_per_point() {
    let out = bin().args(["sweep", "--case", "toy2", "--gammas", "0,0,0;1,0,0;5,0,0", "--jobs", "2"]).output().unwrap();
    assert!(out.status.success());
    let rows: Vec<SweepRow> = rows_from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].error.is_none() && rows[1].error.is_none());
    assert!(rows[2].error.is_some(), "budget above the group size is reported in its row");
}

#[test]
fn cluster_writes_representative_days() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("days.csv");
    let history = concat!(env!("CARGO_MANIFEST_DIR"), "/data/garver_history.csv");
    let status = bin().args(["cluster", "--history", history, "--k", "4", "--seed", "3", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let table = robust_tnep::case::parse_hourly_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(table.days.len(), 4);
}

#[test]
fn verify_passes_on_toy2() {
    let out = bin().args(["verify", "--instance", "toy2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(" ok")).count(), 8);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "name = ").unwrap();
    assert_eq!(bin().args(["solve", "--case"]).arg(&broken).status().unwrap().code(), Some(3));

    let invalid = dir.path().join("invalid.toml");
    let doc = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy2.toml")).unwrap().replace("nominal_level = 60", "nominal_level = -60");
    std::fs::write(&invalid, doc).unwrap();
    assert_eq!(bin().args(["solve", "--case"]).arg(&invalid).status().unwrap().code(), Some(4));

    assert_eq!(bin().args(["solve", "--case", "toy2", "--gamma-d", "3"]).status().unwrap().code(), Some(4));
    assert_eq!(bin().args(["verify", "--instance", "nope"]).status().unwrap().code(), Some(3));
}
