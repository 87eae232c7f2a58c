//! End-to-end tests of the command-line interface, driving the built
//! binary through files in a temporary directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tvlap"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_code(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).expect("readable output");
    let mut lines = text.lines();
    let headers: Vec<String> = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (headers, rows)
}

fn sine_csv(dir: &Path, seed: &str) -> PathBuf {
    let path = dir.join(format!("sine_{seed}.csv"));
    run_ok(&[
        "simulate",
        "--scenario",
        "sine",
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    path
}

#[test]
fn simulate_sine_grid_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = sine_csv(dir.path(), "1");
    let (headers, rows) = read_rows(&a);
    assert_eq!(headers, ["time", "x", "truth", "truth_d1"]);
    assert_eq!(rows.len(), 1201);

    let b = dir.path().join("again.csv");
    run_ok(&[
        "simulate",
        "--scenario",
        "sine",
        "--seed",
        "1",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(&a).unwrap(),
        fs::read(&b).unwrap(),
        "not byte-identical"
    );
}

#[test]
fn simulate_usage_errors_exit_2() {
    let (code, _) = run_code(&["simulate", "--scenario", "sine"]);
    assert_eq!(code, 2, "missing --out");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let (code, _) = run_code(&[
        "simulate",
        "--scenario",
        "nope",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "unknown scenario");
}

#[test]
fn simulate_fault_channels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fault.csv");
    run_ok(&[
        "simulate",
        "--scenario",
        "fault",
        "--seed",
        "1",
        "--jumps",
        "5",
        "--mag",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    let (headers, rows) = read_rows(&path);
    assert_eq!(headers, ["time", "sensor1", "sensor2", "sensor3"]);
    assert_eq!(rows.len(), 800);
}

#[test]
fn filter_detects_analytic_extrema_on_simulated_sine() {
    let dir = tempfile::tempdir().unwrap();
    let input = sine_csv(dir.path(), "4");
    let out = dir.path().join("filtered.csv");
    let run = run_ok(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&run.stdout).into_owned();
    assert!(stdout.contains("events:"), "summary missing: {stdout}");
    assert!(
        stdout.contains("trend mse"),
        "mse summary missing: {stdout}"
    );

    let (headers, rows) = read_rows(&out);
    assert_eq!(
        headers,
        ["n", "time", "fhat", "d1", "d2", "d3", "d4", "p00", "event"]
    );
    assert_eq!(rows.len(), 1201);

    // The four analytic extrema of the clean trend, each to be matched
    // by a correctly-typed event within +-2.0 time units.
    let analytic = [
        (15.707963, "max"),
        (47.123890, "min"),
        (78.539816, "max"),
        (109.955743, "min"),
    ];
    let events: Vec<(f64, String)> = rows
        .iter()
        .filter(|r| !r[8].is_empty())
        .map(|r| (r[1].parse::<f64>().unwrap(), r[8].clone()))
        .collect();
    for (ta, ka) in analytic {
        assert!(
            events
                .iter()
                .any(|(te, ke)| ke == ka && (te - ta).abs() <= 2.0),
            "missing {ka} near t={ta}; events: {events:?}"
        );
    }
}

#[test]
fn filter_constant_input_has_no_events() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("const.csv");
    let mut body = String::from("time,value\n");
    for i in 0..400 {
        body.push_str(&format!("{},7.5\n", i as f64 * 0.1));
    }
    fs::write(&input, body).unwrap();
    let out = dir.path().join("out.csv");
    let run = run_ok(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        String::from_utf8_lossy(&run.stdout).contains("events: 0"),
        "expected zero events"
    );
}

#[test]
fn filter_low_order_with_extrema_flag_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = sine_csv(dir.path(), "1");
    let out = dir.path().join("out.csv");
    let (code, stderr) = run_code(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--k",
        "1",
        "--extrema",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("K >= 2"), "stderr: {stderr}");
}

#[test]
fn filter_reports_malformed_row_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "time,value\n0.0,1.0\n0.1,oops\n").unwrap();
    let out = dir.path().join("out.csv");
    let (code, stderr) = run_code(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains(":3"), "line number missing from: {stderr}");
}

#[test]
fn filter_rejects_non_monotone_time() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("nm.csv");
    fs::write(&input, "time,value\n0.0,1.0\n0.2,1.0\n0.1,1.0\n").unwrap();
    let out = dir.path().join("out.csv");
    let (code, stderr) = run_code(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("not strictly increasing"),
        "stderr: {stderr}"
    );
}

#[test]
fn forecast_predicts_future_minimum_with_growing_variance() {
    let dir = tempfile::tempdir().unwrap();
    let input = sine_csv(dir.path(), "2");
    // Keep data up to t = 100 so the next trend extremum (a minimum
    // near t = 110) falls inside the 200-step horizon.
    let text = fs::read_to_string(&input).unwrap();
    let truncated: Vec<&str> = text.lines().take(1002).collect();
    let cut = dir.path().join("cut.csv");
    fs::write(&cut, truncated.join("\n")).unwrap();

    let out = dir.path().join("forecast.csv");
    run_ok(&[
        "forecast",
        "--in",
        cut.to_str().unwrap(),
        "--steps",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (headers, rows) = read_rows(&out);
    assert_eq!(headers, ["k", "fhat", "p00", "event"]);
    assert_eq!(rows.len(), 200);
    assert!(
        rows.iter().any(|r| r[3] == "min"),
        "no predicted minimum in horizon"
    );
    let p00: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for w in p00.windows(2) {
        assert!(w[1] + 1e-15 >= w[0], "forecast variance decreased");
    }

    let single = dir.path().join("single.csv");
    run_ok(&[
        "forecast",
        "--in",
        cut.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        single.to_str().unwrap(),
    ]);
    let (_, rows) = read_rows(&single);
    assert_eq!(rows.len(), 1);
}

#[test]
fn compare_outputs_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let run = run_ok(&[
        "compare",
        "--models",
        "level",
        "--trials",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&run.stdout).into_owned();
    assert!(stdout.contains("level"));
    let (_, rows) = read_rows(&out);
    assert_eq!(rows.len(), 1, "one model, one trial, one row");

    let (code, _) = run_code(&["compare", "--trials", "0"]);
    assert_eq!(code, 2);
    let (code, stderr) = run_code(&["compare", "--models", "arima"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown model"), "stderr: {stderr}");
}

#[test]
fn diagnose_flags_jump_channel_and_validates_input() {
    let dir = tempfile::tempdir().unwrap();
    let fault = dir.path().join("fault.csv");
    run_ok(&[
        "simulate",
        "--scenario",
        "fault",
        "--seed",
        "1",
        "--out",
        fault.to_str().unwrap(),
    ]);
    let report = dir.path().join("report.csv");
    let run = run_ok(&[
        "diagnose",
        "--in",
        fault.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&run.stdout).into_owned();
    assert!(stdout.contains("FAULTY"), "stdout: {stdout}");
    let (_, rows) = read_rows(&report);
    let flags: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(flags, ["0", "0", "1"], "only sensor3 faulty");

    // Identical clean channels: nothing flagged.
    let text = fs::read_to_string(&fault).unwrap();
    let mut same = String::from("time,a,b,c\n");
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        same.push_str(&format!(
            "{},{},{},{}\n",
            fields[0], fields[1], fields[1], fields[1]
        ));
    }
    let same_path = dir.path().join("same.csv");
    fs::write(&same_path, same).unwrap();
    let run = run_ok(&["diagnose", "--in", same_path.to_str().unwrap()]);
    assert!(!String::from_utf8_lossy(&run.stdout).contains("FAULTY"));

    // Fewer than two channels is a usage error.
    let single = dir.path().join("single.csv");
    fs::write(&single, "time,a\n0.0,1.0\n0.1,1.0\n").unwrap();
    let (code, _) = run_code(&["diagnose", "--in", single.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn check_exit_codes_follow_verdict() {
    let (code, _) = run_code(&["check", "--k", "4", "--t", "0.1", "--g", "g1"]);
    assert_eq!(code, 0);
    let (code, _) = run_code(&["check", "--k", "4", "--zero-g"]);
    assert_eq!(code, 1);
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = sine_csv(dir.path(), "1");
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# tracking setup\nk = 2\nq = 1e-6\n").unwrap();

    let out_a = dir.path().join("a.csv");
    run_ok(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
        "--config",
        conf.to_str().unwrap(),
    ]);
    let (headers, _) = read_rows(&out_a);
    assert_eq!(
        headers,
        ["n", "time", "fhat", "d1", "d2", "p00", "event"],
        "config k=2"
    );

    let out_b = dir.path().join("b.csv");
    run_ok(&[
        "filter",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
        "--config",
        conf.to_str().unwrap(),
        "--k",
        "3",
    ]);
    let (headers, _) = read_rows(&out_b);
    assert_eq!(
        headers,
        ["n", "time", "fhat", "d1", "d2", "d3", "p00", "event"],
        "command line overrides config file"
    );
}
