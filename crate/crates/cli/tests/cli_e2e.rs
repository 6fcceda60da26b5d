//! Black-box tests of the `indsel` binary: subcommand artifacts and exit
//! codes.

use std::path::Path;
use std::process::Command;

use indsel_cli::synth::synthetic_ohlcv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_indsel"))
}

fn write_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let series = synthetic_ohlcv(260, 5);
    let input = dir.join("prices.csv");
    series.write_csv(std::fs::File::create(&input).unwrap()).unwrap();
    let mid = series.len() / 2;
    let config = format!(
        "[data]\n\
         input = prices.csv\n\
         selection_start = {}\n\
         selection_end = {}\n\
         prediction_start = {}\n\
         prediction_end = {}\n\
         [window]\n\
         w = 3\n\
         h = 3\n\
         [indicators]\n\
         roster = sma(length=5); ema(length=8); rsi(length=14); mom(length=10); willr(length=14); atr(length=14)\n\
         [selection]\n\
         methods = sfs\n\
         regressors = LR, Ridge\n\
         metrics = mse\n\
         [output]\n\
         dir = out\n\
         fast = true\n\
         seed = 3\n",
        series.dates[0],
        series.dates[mid - 1],
        series.dates[mid],
        series.dates[series.len() - 1],
    );
    let config_path = dir.join("config.ini");
    std::fs::write(&config_path, config).unwrap();
    (input, config_path)
}

#[test]
fn synth_writes_loadable_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("synthetic.csv");
    let status = bin()
        .args(["synth", "--days", "50", "--file", file.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let series = indsel::series::load_ohlcv(&file).unwrap();
    assert_eq!(series.len(), 50);
}

#[test]
fn pipeline_subcommands_emit_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, config) = write_fixture(tmp.path());
    let cfg = config.to_str().unwrap();

    for sub in ["ingest", "indicators", "window", "select"] {
        let output = bin().args(["--config", cfg, sub]).output().unwrap();
        assert!(
            output.status.success(),
            "{sub} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let out = tmp.path().join("out");
    assert!(out.join("ingested.csv").is_file());
    assert!(out.join("features.csv").is_file());
    assert!(out.join("windowed.csv").is_file());
    assert!(out.join("selection/sfs_LR_mse.json").is_file());
    assert!(out.join("selection/sfs_Ridge_mse.json").is_file());

    // features.csv has Date first; windowed.csv ends with target
    let features = std::fs::read_to_string(out.join("features.csv")).unwrap();
    assert!(features.starts_with("Date,"));
    let windowed = std::fs::read_to_string(out.join("windowed.csv")).unwrap();
    assert!(windowed.lines().next().unwrap().ends_with(",target"));
    assert!(windowed.contains("sma_5@0"));

    // train -> evaluate -> report chain
    let output = bin()
        .args(["--config", cfg, "train", "--family", "Ridge"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(out.join("models/Ridge.bin").is_file());

    let output = bin()
        .args(["--config", cfg, "evaluate", "--family", "Ridge"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("mse"), "evaluate output: {stdout}");

    let output = bin().args(["--config", cfg, "report"]).output().unwrap();
    assert!(output.status.success());
    assert!(out.join("reports/metrics.csv").is_file());
    assert!(out.join("reports/improvements.csv").is_file());
    assert!(out.join("plots/census.csv").is_file());
}

#[test]
fn run_experiment_prints_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, config) = write_fixture(tmp.path());
    let output = bin()
        .args(["--config", config.to_str().unwrap(), "run-experiment"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("2 selection runs"), "stdout: {stdout}");
    assert!(stdout.contains("top indicator:"), "stdout: {stdout}");
}

#[test]
fn config_errors_exit_1() {
    // missing --config
    let status = bin().arg("select").status().unwrap();
    assert_eq!(status.code(), Some(1));

    // unreadable config path
    let status = bin()
        .args(["--config", "/nonexistent/config.ini", "select"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // invalid config contents
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.ini");
    std::fs::write(&path, "[data]\ninput = p.csv\nbogus_key = 1\n").unwrap();
    let status = bin()
        .args(["--config", path.to_str().unwrap(), "select"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();

    // input file does not exist
    let config = tmp.path().join("config.ini");
    std::fs::write(&config, "[data]\ninput = missing.csv\n").unwrap();
    let status = bin()
        .args(["--config", config.to_str().unwrap(), "ingest"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // malformed header
    let bad_csv = tmp.path().join("bad.csv");
    std::fs::write(&bad_csv, "Date,Close\n2020-01-01,1\n").unwrap();
    let config2 = tmp.path().join("config2.ini");
    std::fs::write(&config2, "[data]\ninput = bad.csv\n").unwrap();
    let status = bin()
        .args(["--config", config2.to_str().unwrap(), "ingest"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
