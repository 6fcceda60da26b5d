//! Report-file emission: metrics table, improvement percentages,
//! selection JSON, and the run manifest.

use std::io::Write;
use std::path::Path;

use indsel::evaluate::{Metric, MetricReport};
use indsel::select::SelectionResult;
use sha2::{Digest, Sha256};

use crate::experiment::ModelReport;
use crate::CliError;

fn create(path: &Path) -> Result<std::fs::File, CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(std::fs::File::create(path)?)
}

fn metric_cell(report: &MetricReport, metric: Metric) -> String {
    match metric {
        Metric::Mape => report
            .mape
            .map(|v| v.to_string())
            .unwrap_or_else(|| "undefined".to_string()),
        other => report.value(other).to_string(),
    }
}

/// `model,method,metric_name,value` rows: baseline plus selected runs.
pub fn write_metrics_csv(path: &Path, reports: &[ModelReport]) -> Result<(), CliError> {
    let mut f = create(path)?;
    writeln!(f, "model,method,metric_name,value")?;
    let mut seen_baselines: Vec<String> = Vec::new();
    for report in reports {
        if !seen_baselines.contains(&report.family) {
            seen_baselines.push(report.family.clone());
            for metric in Metric::ALL {
                writeln!(
                    f,
                    "{},baseline,{},{}",
                    report.family,
                    metric.as_str(),
                    metric_cell(&report.baseline, metric)
                )?;
            }
        }
        for metric in Metric::ALL {
            writeln!(
                f,
                "{},{}_{},{},{}",
                report.family,
                report.method,
                report.selection_metric,
                metric.as_str(),
                metric_cell(&report.selected, metric)
            )?;
        }
    }
    Ok(())
}

/// Baseline vs selected error metrics with the improvement percentage.
pub fn write_improvements_csv(path: &Path, reports: &[ModelReport]) -> Result<(), CliError> {
    let mut f = create(path)?;
    writeln!(f, "model,method,metric_name,baseline,selected,improvement_pct")?;
    for report in reports {
        for (name, pct) in &report.improvements {
            let metric = Metric::parse(name).expect("improvement metric name");
            writeln!(
                f,
                "{},{}_{},{},{},{},{}",
                report.family,
                report.method,
                report.selection_metric,
                name,
                metric_cell(&report.baseline, metric),
                metric_cell(&report.selected, metric),
                pct,
            )?;
        }
    }
    Ok(())
}

/// One JSON file per selection run.
pub fn write_selection_results(dir: &Path, results: &[SelectionResult]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for result in results {
        let name = format!(
            "{}_{}_{}.json",
            result.method,
            result.regressor.family,
            result.metric
        );
        let mut f = std::fs::File::create(dir.join(name))?;
        let json = serde_json::to_string_pretty(result).map_err(indsel::Error::from)?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

/// Load every `*.json` under the selection directory, sorted by filename.
pub fn read_selection_results(dir: &Path) -> Result<Vec<SelectionResult>, CliError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Config(format!(
            "no selection results in {}; run the select phase first",
            dir.display()
        )));
    }
    let mut out = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        let result: SelectionResult =
            serde_json::from_str(&text).map_err(indsel::Error::from)?;
        out.push(result);
    }
    Ok(out)
}

/// One JSON report per model under `reports/`.
pub fn write_model_reports(dir: &Path, reports: &[ModelReport]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for report in reports {
        let mut f = std::fs::File::create(dir.join(format!("{}.json", report.stem())))?;
        let json = serde_json::to_string_pretty(report).map_err(indsel::Error::from)?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

/// Run manifest. The timestamp lives here and only here, so the rest of
/// the output tree is byte-reproducible.
pub fn write_manifest(
    path: &Path,
    config_text: &str,
    seed: u64,
    fast: bool,
) -> Result<(), CliError> {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let mut f = create(path)?;
    writeln!(f, "version = {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(f, "seed = {seed}")?;
    writeln!(f, "fast = {fast}")?;
    writeln!(f, "config_sha256 = {hex}")?;
    writeln!(f, "created_utc = {}", chrono::Utc::now().to_rfc3339())?;
    Ok(())
}
