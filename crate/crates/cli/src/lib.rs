//! Experiment orchestration around the `indsel` library: config files,
//! the two-phase selection/prediction protocol, and report/plot output.
//!
//! Output layout under the configured directory:
//!
//! ```text
//! out/
//!   manifest                      # version, seed, config hash, timestamp
//!   selection/<method>_<family>_<metric>.json
//!   reports/<method>_<family>_<metric>.json
//!   reports/metrics.csv           # model,method,metric_name,value
//!   reports/improvements.csv
//!   plots/pred_vs_actual_*.csv|svg
//!   plots/window_sweep.csv|svg    # when [window] sweep is set
//!   plots/census.csv|svg
//! ```

pub mod config;
pub mod experiment;
pub mod pipeline;
pub mod plots;
pub mod report;
pub mod synth;

use std::path::Path;

use indsel::indicators::IndicatorRegistry;
use indsel::select::{top_indicator_census, SelectionResult};
use indsel::series::PriceSeries;

use config::ExperimentConfig;
use experiment::ModelReport;

/// CLI failure with a process exit code: 1 config, 2 data, 3 numeric.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(indsel::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(err) => match err {
                indsel::Error::InvalidParam(_) => 1,
                indsel::Error::NumericInput(_) => 3,
                _ => 2,
            },
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(err) => write!(f, "{err}"),
            CliError::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<indsel::Error> for CliError {
    fn from(err: indsel::Error) -> Self {
        CliError::Core(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

/// Everything a full run produced, for callers that want the values as
/// well as the files.
pub struct RunSummary {
    pub selections: Vec<SelectionResult>,
    pub reports: Vec<ModelReport>,
    pub census: Vec<(String, f64)>,
    pub sweep: Vec<(usize, f64)>,
}

pub fn load_input(config: &ExperimentConfig) -> Result<PriceSeries, CliError> {
    Ok(indsel::series::load_ohlcv(&config.input)?)
}

/// The complete two-phase experiment: selection, prediction, reports,
/// plots, manifest.
pub fn run_experiment(
    config: &ExperimentConfig,
    config_text: &str,
) -> Result<RunSummary, CliError> {
    let series = load_input(config)?;
    let registry = IndicatorRegistry::with_defaults();

    let selections = experiment::run_selection_phase(config, &series, &registry)?;
    report::write_selection_results(&config.out_dir.join("selection"), &selections)?;

    let reports = experiment::run_prediction_phase(config, &series, &registry, &selections)?;
    let reports_dir = config.out_dir.join("reports");
    report::write_model_reports(&reports_dir, &reports)?;
    report::write_metrics_csv(&reports_dir.join("metrics.csv"), &reports)?;
    report::write_improvements_csv(&reports_dir.join("improvements.csv"), &reports)?;

    let census = top_indicator_census(&selections)?;
    let plots_dir = config.out_dir.join("plots");
    plots::emit_census(&plots_dir, &census)?;
    for model_report in &reports {
        plots::emit_pred_vs_actual(&plots_dir, model_report)?;
    }
    let sweep = if config.window_sweep.is_empty() {
        Vec::new()
    } else {
        experiment::window_size_sweep_mse(config, &series, &registry)?
    };
    plots::emit_window_sweep(&plots_dir, &sweep)?;

    report::write_manifest(
        &config.out_dir.join("manifest"),
        config_text,
        config.seed,
        config.fast,
    )?;

    Ok(RunSummary {
        selections,
        reports,
        census,
        sweep,
    })
}

/// Rebuild prediction-phase reports and plots from persisted selection
/// results (the `report` subcommand).
pub fn rebuild_reports(
    config: &ExperimentConfig,
    config_text: &str,
) -> Result<RunSummary, CliError> {
    let series = load_input(config)?;
    let registry = IndicatorRegistry::with_defaults();
    let selections = report::read_selection_results(&config.out_dir.join("selection"))?;

    let reports = experiment::run_prediction_phase(config, &series, &registry, &selections)?;
    let reports_dir = config.out_dir.join("reports");
    report::write_model_reports(&reports_dir, &reports)?;
    report::write_metrics_csv(&reports_dir.join("metrics.csv"), &reports)?;
    report::write_improvements_csv(&reports_dir.join("improvements.csv"), &reports)?;

    let census = top_indicator_census(&selections)?;
    let plots_dir = config.out_dir.join("plots");
    plots::emit_census(&plots_dir, &census)?;
    for model_report in &reports {
        plots::emit_pred_vs_actual(&plots_dir, model_report)?;
    }

    report::write_manifest(
        &config.out_dir.join("manifest"),
        config_text,
        config.seed,
        config.fast,
    )?;

    Ok(RunSummary {
        selections,
        reports,
        census,
        sweep: Vec::new(),
    })
}

/// Write a file, creating parent directories.
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
