use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cornerheat::{ConvergenceRecord, CSV_HEADER};

fn cornerheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cornerheat")).args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// CSV contents with the timing column blanked.
fn without_timing(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_owned())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn table1_writes_csv_with_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = cornerheat(&["table1", "--levels", "3", "--gamma", "0.136", "--out", out, "--series"]);
    assert!(run.status.success(), "{}", text(&run.stderr));
    for name in ["table1_standard.csv", "table1_corrected.csv"] {
        let csv = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
        let record = ConvergenceRecord::read_csv(name, csv.as_bytes()).unwrap();
        record.audit().unwrap();
    }
    let series = fs::read_to_string(dir.path().join("table1_series.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("step,t,linf,l2_err,weighted_err"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("table1.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["levels"], 3);
    assert!(text(&run.stdout).contains("wrote "));
}

#[test]
fn identical_configs_give_identical_csv_up_to_timing() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let run = cornerheat(&["table1", "--levels", "4", "--gamma", "0.136", "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert!(run.status.success(), "{}", text(&run.stderr));
    }
    for name in ["table1_standard.csv", "table1_corrected.csv"] {
        assert_eq!(without_timing(&dirs[0].path().join(name)), without_timing(&dirs[1].path().join(name)));
    }
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let cfg = dir.path().join("study.toml");
    fs::write(
        &cfg,
        format!("[study]\nstudy = \"elliptic_pollution\"\nlevels = 5\ngamma = 0.136\nout = {:?}\n", out.to_str().unwrap()),
    )
    .unwrap();
    let run = cornerheat(&["elliptic-pollution", "--config", cfg.to_str().unwrap(), "--levels", "3"]);
    assert!(run.status.success(), "{}", text(&run.stderr));
    let csv = fs::read_to_string(out.join("elliptic_standard.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "flag levels = 3 wins over the file");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("elliptic_pollution.json")).unwrap()).unwrap();
    assert_eq!(json["gamma"], 0.136);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[study]\nlevles = 3\n").unwrap();
    let other = dir.path().join("other.toml");
    fs::write(&other, "[study]\nstudy = \"gamma\"\n").unwrap();
    let cases: [&[&str]; 6] = [
        &["table1", "--config", bad.to_str().unwrap(), "--out", out],
        &["table1", "--config", other.to_str().unwrap(), "--out", out],
        &["table1", "--levels", "2", "--out", out],
        &["table1", "--gamma", "0.7", "--out", out],
        &["table1", "--config", "/nonexistent/study.toml"],
        &["no-such-study"],
    ];
    for args in cases {
        let run = cornerheat(args);
        assert_eq!(run.status.code(), Some(1), "{args:?}: {}", text(&run.stderr));
        assert!(!run.stderr.is_empty());
    }
}

#[test]
fn check_flag_turns_band_violations_into_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // Without correction the weighted rate misses its band.
    let args = ["elliptic-pollution", "--levels", "4", "--gamma", "0", "--out", out];
    let plain = cornerheat(&args);
    assert_eq!(plain.status.code(), Some(0));
    assert!(text(&plain.stdout).contains("FAIL corrected weighted rate"));
    let checked = cornerheat(&[&args[..], &["--check"]].concat());
    assert_eq!(checked.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let run = cornerheat(&["--help"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(text(&run.stdout).contains("advection-qoi"));
}
