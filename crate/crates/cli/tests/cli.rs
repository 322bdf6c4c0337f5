//! End-to-end runs of the qfrob binary: exit codes, output formats, and
//! the solve -> verify JSON round trip.

use std::process::Command;

fn qfrob(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_qfrob"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn classify_exit_codes() {
    let (stdout, _, code) = qfrob(&["classify", "--q", "2", "(1-S)^2 - z*S^2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("regular singular"));

    let (stdout, _, code) = qfrob(&["classify", "--q", "2", "(1-S)^2 - z*S^5"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("irregular"));

    let (_, stderr, code) = qfrob(&["classify", "--q", "2", "(1-S"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("syntax error"));

    let (_, stderr, code) = qfrob(&["classify", "--q", "0.5", "1 - S"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("|q|"));
}

#[test]
fn polygon_formats() {
    let (ascii, _, code) = qfrob(&["polygon", "--q", "2", "--format", "ascii", "q*z*S^2 - S + 1"]);
    assert_eq!(code, 0);
    assert!(ascii.contains("slope     -1"));
    assert!(ascii.contains("slope      0"));

    let (svg, _, code) = qfrob(&["polygon", "--q", "2", "--format", "svg", "q*z*S^2 - S + 1"]);
    assert_eq!(code, 0);
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));

    let (json, _, code) = qfrob(&["polygon", "--q", "2", "--format", "json", "q*z*S^2 - S + 1"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let slopes: Vec<&str> = doc["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["slope"].as_str().unwrap())
        .collect();
    assert_eq!(slopes, ["-1", "0"]);
}

#[test]
fn solve_reports_theta_half_solutions() {
    let (stdout, _, code) = qfrob(&["solve", "--q", "2", "z*S^2 - 1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("theta^(-1/2)"), "{stdout}");
    assert!(stdout.contains("e[q^1/4]"), "{stdout}");
}

#[test]
fn solve_verify_json_roundtrip() {
    let dir = std::env::temp_dir().join("qfrob-roundtrip");
    std::fs::create_dir_all(&dir).unwrap();
    let sol_path = dir.join("solutions.json");
    let sol_str = sol_path.to_str().unwrap();

    let op = "q*z*S^2 - S + 1";
    let (_, _, code) = qfrob(&["solve", "--q", "2", "--json", "--out", sol_str, op]);
    assert_eq!(code, 0);

    let (in_process, _, code) = qfrob(&["verify", "--q", "2", "--json", op]);
    assert_eq!(code, 0);
    let (from_file, _, code) = qfrob(&["verify", "--q", "2", "--json", "--solutions", sol_str, op]);
    assert_eq!(code, 0);
    // double mode: identical inputs give the identical residual report
    assert_eq!(in_process, from_file);

    let doc: serde_json::Value = serde_json::from_str(&in_process).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 2);
    for row in doc.as_array().unwrap() {
        assert!(row["residual_max_rel"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn eval_subcommands() {
    let (stdout, _, code) = qfrob(&["eval", "eq", "--q", "2", "--z", "0.5", "--lambda", "4"]);
    assert_eq!(code, 0);
    // e_{q, q^2}(z) = q z^2 = 0.5
    let v: f64 = stdout.split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 0.5).abs() < 1e-10);

    let (stdout, _, code) = qfrob(&["eval", "lq", "--q", "2", "--z", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.split_whitespace().next().unwrap().parse::<f64>().is_ok());

    // theta zero is an error
    let (_, stderr, code) = qfrob(&["eval", "lq", "--q", "2", "--z", "-1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("theta"), "{stderr}");
}

#[test]
fn examples_run_all_passes() {
    let (stdout, _, code) = qfrob(&["examples", "run", "--all", "--q", "2"]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(stdout.matches("PASS").count(), 11);
    assert_eq!(stdout.matches("FAIL").count(), 0);
    // deterministic name-sorted ordering
    let names: Vec<&str> = stdout
        .lines()
        .filter_map(|l| l.split_whitespace().nth(1))
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn examples_single_and_unknown() {
    let (stdout, _, code) = qfrob(&["examples", "run", "q-hypergeometric", "--q", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("PASS q-hypergeometric"));

    let (_, _, code) = qfrob(&["examples", "run", "no-such-fixture"]);
    assert_eq!(code, 1);
}

#[test]
fn high_precision_mode_runs() {
    let (stdout, _, code) = qfrob(&[
        "examples",
        "run",
        "q-hypergeometric",
        "--q",
        "2",
        "--precision",
        "50",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS"));
    // deviations must be far below double rounding
    let dev: f64 = stdout
        .split("deviation ")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev < 1e-25, "high-precision deviation {dev}");
}

#[test]
fn solve_csv_table() {
    let (stdout, _, code) = qfrob(&["solve", "--q", "2", "--csv", "--truncation", "6", "z*S^2 - 1"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "solution,stratum,exponent_num,ramification,re,im"
    );
    assert!(stdout.lines().count() > 2);
    assert!(stdout.lines().nth(1).unwrap().starts_with("0,0,0,2,1,"));
}

#[test]
fn examples_from_fixture_file() {
    let dir = std::env::temp_dir().join("qfrob-fixture-file");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fixture.json");
    std::fs::write(
        &path,
        r#"{
            "name": "file-fixture",
            "operator": "q*z*S^2 - S + 1",
            "provenance": "file-loaded smoke fixture",
            "oracle": {
                "polygon": [[[-1, 1], 1], [[0, 1], 1]],
                "regular_singular": false,
                "solution_count": 2,
                "residual_check": true
            }
        }"#,
    )
    .unwrap();
    let (stdout, stderr, code) = qfrob(&[
        "examples",
        "run",
        "--file",
        path.to_str().unwrap(),
        "--q",
        "2",
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    assert!(stdout.contains("PASS file-fixture"));
}
