//! End-to-end checks of the `svfie` binary: schemas, determinism, and exit
//! codes.

use std::process::{Command, Output};

fn svfie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svfie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = svfie(args);
    assert!(
        out.status.success(),
        "`svfie {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn bound_reproduces_the_hand_substitution() {
    let text = stdout_of(&["bound", "--c", "1", "--h", "0.5"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r1,r2,bound"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 1.75);
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[2].parse::<f64>().unwrap(), 1.75);
}

#[test]
fn converge_ends_inside_the_first_order_window() {
    let text = stdout_of(&["converge", "--problem", "example2_det", "--m", "8..128"]);
    let last = text.lines().last().unwrap();
    let rate: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((0.7..=1.3).contains(&rate), "final rate {rate}");
}

#[test]
fn compare_shows_negligible_discrepancy() {
    let text = stdout_of(&["compare", "--problem", "example1", "--m", "32", "--seed", "1"]);
    for line in text.lines().skip(1) {
        let max_abs_diff: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(max_abs_diff <= 1e-9, "discrepancy {max_abs_diff}");
    }
}

#[test]
fn solve_emits_grid_and_probe_rows() {
    let text = stdout_of(&[
        "solve",
        "--problem",
        "const_fredholm",
        "--m",
        "4",
        "--probes",
        "0.1,0.9",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,t,x");
    assert_eq!(lines.len(), 1 + 4 + 2);
    assert!(lines[1..=4].iter().all(|l| l.starts_with("grid,")));
    assert!(lines[5..=6].iter().all(|l| l.starts_with("probe,")));
    // The constant problem solves to exactly 2 everywhere.
    for line in &lines[1..] {
        let x: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((x - 2.0).abs() < 1e-9);
    }
}

#[test]
fn mc_csv_schema_is_stable() {
    let text = stdout_of(&[
        "mc",
        "--problem",
        "example2",
        "--m",
        "8",
        "--seed",
        "3",
        "--paths",
        "20",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,mean,std,stderr,n_paths,m,seed");
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[4], "20");
        assert_eq!(cols[5], "8");
        assert_eq!(cols[6], "3");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let compare_args = ["compare", "--problem", "example2", "--m", "16", "--seed", "5"];
    assert_eq!(stdout_of(&compare_args), stdout_of(&compare_args));

    let mc_args = [
        "mc", "--problem", "example1", "--m", "8", "--seed", "9", "--paths", "50",
    ];
    assert_eq!(stdout_of(&mc_args), stdout_of(&mc_args));
}

#[test]
fn json_output_carries_meta_and_rows() {
    let text = stdout_of(&[
        "mc",
        "--problem",
        "example2",
        "--m",
        "8",
        "--paths",
        "10",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["meta"]["command"], "mc");
    assert_eq!(doc["meta"]["m"], 8);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[0]["mean"].is_number());
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = std::env::temp_dir().join("svfie-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bound.csv");
    let _ = std::fs::remove_file(&path);

    let out = svfie(&["bound", "--c", "1", "--h", "0.5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("r1,r2,bound"));
}

#[test]
fn usage_errors_exit_with_code_one() {
    let unknown = svfie(&["solve", "--problem", "nope", "--m", "8"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown problem"));

    let bad_m = svfie(&["solve", "--problem", "example1", "--m", "3"]);
    assert_eq!(bad_m.status.code(), Some(1));

    let no_exact = svfie(&["converge", "--problem", "example1", "--m", "8..32"]);
    assert_eq!(no_exact.status.code(), Some(1));

    let short_range = svfie(&["converge", "--problem", "example1_det", "--m", "8..16"]);
    assert_eq!(short_range.status.code(), Some(1));

    let missing_flag = svfie(&["solve", "--m", "8"]);
    assert_eq!(missing_flag.status.code(), Some(1));
}

#[test]
fn help_prints_and_exits_zero() {
    let help = svfie(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("Usage"));
}
