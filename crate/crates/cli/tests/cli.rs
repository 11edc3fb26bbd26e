use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

const EXTREMAL: &str = "3\n1 1/2 1/2\n1/2 5/4 3/4\n1/2 3/4 5/4\n";

fn hkz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn hkz_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkz"))
        .args(args)
        .env("HKZ_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn gram_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

#[test]
fn reduce_extremal_is_unchanged() {
    let f = gram_file(EXTREMAL);
    let o = hkz(&["reduce", path(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("already HKZ reduced"), "{text}");
    assert!(text.contains("25/12"));
}

#[test]
fn reduce_swaps_diagonal() {
    let f = gram_file("2\n4 0\n0 1\n");
    let o = hkz(&["reduce", path(&f), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["reduced"], serde_json::json!([["1", "0"], ["0", "4"]]));
    assert_eq!(v["certificate"]["status"], "reduced");
}

#[test]
fn input_errors_map_to_exit_codes() {
    let empty = gram_file("");
    assert_eq!(hkz(&["reduce", path(&empty)]).status.code(), Some(2));
    let bad = gram_file("2\n1 x\n0 1\n");
    let o = hkz(&["defect", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 3"));
    let npd = gram_file("2\n1 2\n2 1\n");
    assert_eq!(hkz(&["reduce", path(&npd)]).status.code(), Some(3));
    let asym = gram_file("2\n1 0\n1/2 1\n");
    assert_eq!(hkz(&["minima", path(&asym)]).status.code(), Some(3));
    assert_eq!(
        hkz(&["reduce", "/nonexistent/gram.txt"]).status.code(),
        Some(3)
    );
    assert_eq!(hkz(&["reduce", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn defect_and_minima() {
    let f = gram_file(EXTREMAL);
    let v = json(&hkz(&["defect", path(&f), "--format", "json"]));
    assert_eq!(v["defect"]["exact"], "25/12");
    assert_eq!(v["delta_exact"]["exact"], "25/12");
    assert_eq!(v["within_bounds"], true);

    let v = json(&hkz(&["minima", path(&f), "--format", "json"]));
    assert_eq!(
        v["minima"]["minima_sq"],
        serde_json::json!(["1", "1", "5/4"])
    );
    assert_eq!(v["hermite_invariant_power"]["exact"], "4/3");

    let big = gram_file("7\n1 0 0 0 0 0 0\n0 1 0 0 0 0 0\n0 0 1 0 0 0 0\n0 0 0 1 0 0 0\n0 0 0 0 1 0 0\n0 0 0 0 0 1 0\n0 0 0 0 0 0 1\n");
    assert_eq!(hkz(&["minima", path(&big)]).status.code(), Some(4));
    assert_eq!(
        hkz(&["minima", path(&f), "--format", "csv"]).status.code(),
        Some(4)
    );
}

#[test]
fn bounds_table() {
    let o = hkz(&["bounds", "--max-rank", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().ends_with(",25/12"));

    let v = json(&hkz(&["bounds", "--max-rank", "4", "--format", "json"]));
    assert_eq!(v[3]["new_bound"]["exact"], "1325/288");
    assert_eq!(
        v[3]["new_bound"]["decimal"].as_f64().unwrap(),
        4.60069444444
    );

    let o = hkz(&["bounds", "--max-rank", "9"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Hermite constant unknown"));
}

#[test]
fn verify_proof_default_step() {
    let o = hkz(&["verify-proof"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["grid_step"], "1/100");
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 4);
    for c in cases {
        assert!(c["violations"].as_array().unwrap().is_empty());
        let eq = c["equality_points"].as_array().unwrap();
        match c["case_id"].as_str().unwrap() {
            "NEG_KMAX" => {
                assert_eq!(eq.len(), 1);
                assert_eq!(eq[0]["sigma"], "-1/2");
            }
            "POS_KMAX" => {
                assert_eq!(eq.len(), 1);
                assert_eq!(
                    (&eq[0]["lambda"], &eq[0]["mu"], &eq[0]["sigma"]),
                    (&"1/2".into(), &"1/2".into(), &"1/2".into())
                );
            }
            _ => assert!(eq.is_empty()),
        }
        assert!(c["wall_time_ms"].is_number());
    }
}

#[test]
fn verify_proof_negative_control() {
    let o = hkz(&[
        "verify-proof",
        "--step",
        "1/50",
        "--case",
        "POS_KMIN",
        "--inject-fault",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["passed"], false);
    assert!(!v["cases"][0]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn verify_proof_rejects_bad_steps() {
    for step in ["1/30", "3/200", "0", "-1/100", "abc", "1/0"] {
        let arg = format!("--step={step}");
        let o = hkz(&["verify-proof", &arg]);
        assert_eq!(o.status.code(), Some(3), "step {step}");
    }
    let o = hkz(&["verify-proof", "--case", "SIDEWAYS"]);
    assert_eq!(o.status.code(), Some(3));
}

fn run_experiment(dir: &Path, threads: &str) -> String {
    let out = dir.join(format!("trials-{threads}.csv"));
    let o = hkz_env(
        &[
            "experiment",
            "--rank",
            "4",
            "--trials",
            "12",
            "--seed",
            "9",
            "--entry-bound",
            "8",
            "--out",
            out.to_str().unwrap(),
        ],
        threads,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn experiment_csv_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_experiment(dir.path(), "1");
    let b = run_experiment(dir.path(), "3");
    assert_eq!(a, b);
    assert_eq!(
        a.lines().next().unwrap(),
        "trial,rank,defect_exact,defect_float,gamma_pow,lls_bound,new_bound,chain_ok,nodes"
    );
    assert_eq!(a.lines().count(), 13);
    assert!(a.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn experiment_summary_and_config_errors() {
    let o = hkz(&[
        "experiment",
        "--rank",
        "3",
        "--trials",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["max_defect"]["exact"], "25/12");
    assert_eq!(v["witness"][1][2], "3/4");

    assert_eq!(hkz(&["experiment", "--rank", "7"]).status.code(), Some(3));
    assert_eq!(hkz(&["experiment", "--trials", "0"]).status.code(), Some(3));
    assert_eq!(hkz_env(&["bounds"], "zero").status.code(), Some(3));
}
