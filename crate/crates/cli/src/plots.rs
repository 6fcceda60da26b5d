//! Plot-data emission: CSVs plus minimal self-contained SVG line charts.

use std::io::Write;
use std::path::Path;

use crate::experiment::ModelReport;
use crate::CliError;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

/// One polyline per named series over a shared x index.
pub fn line_chart_svg(title: &str, series: &[(&str, &[f64])]) -> String {
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    let mut max_len = 1usize;
    for (_, values) in series {
        max_len = max_len.max(values.len());
        for v in values.iter().filter(|v| v.is_finite()) {
            min_y = min_y.min(*v);
            max_y = max_y.max(*v);
        }
    }
    if !min_y.is_finite() {
        min_y = 0.0;
        max_y = 1.0;
    }
    if max_y == min_y {
        max_y = min_y + 1.0;
    }
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x_of = |i: usize| MARGIN + plot_w * i as f64 / (max_len.max(2) - 1) as f64;
    let y_of = |v: f64| MARGIN + plot_h * (1.0 - (v - min_y) / (max_y - min_y));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{m:.1}\" y1=\"{t:.1}\" x2=\"{m:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{m:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" \
         text-anchor=\"end\">{:.4}</text>\n",
        MARGIN - 4.0,
        MARGIN + 4.0,
        max_y
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" \
         text-anchor=\"end\">{:.4}</text>\n",
        MARGIN - 4.0,
        HEIGHT - MARGIN + 4.0,
        min_y
    ));

    for (s, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, v)| format!("{:.2},{:.2}", x_of(i), y_of(*v)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             fill=\"{color}\">{name}</text>\n",
            MARGIN + 8.0,
            MARGIN + 14.0 + 14.0 * s as f64,
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

/// Predicted-vs-actual CSV + SVG per model report.
pub fn emit_pred_vs_actual(dir: &Path, report: &ModelReport) -> Result<(), CliError> {
    let stem = report.stem();
    let mut csv = String::from("date,actual,predicted\n");
    for i in 0..report.actual.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            report.test_dates[i], report.actual[i], report.predicted[i]
        ));
    }
    write_file(&dir.join(format!("pred_vs_actual_{stem}.csv")), &csv)?;
    let svg = line_chart_svg(
        &format!("predicted vs actual: {stem}"),
        &[("actual", &report.actual), ("predicted", &report.predicted)],
    );
    write_file(&dir.join(format!("pred_vs_actual_{stem}.svg")), &svg)
}

/// Window-size sweep CSV + SVG; skipped (with a log line) when empty.
pub fn emit_window_sweep(dir: &Path, sweep: &[(usize, f64)]) -> Result<(), CliError> {
    if sweep.is_empty() {
        log::warn!("window sweep empty; skipping figure output");
        return Ok(());
    }
    let mut csv = String::from("w,mse\n");
    for (w, mse) in sweep {
        csv.push_str(&format!("{w},{mse}\n"));
    }
    write_file(&dir.join("window_sweep.csv"), &csv)?;
    let values: Vec<f64> = sweep.iter().map(|(_, mse)| *mse).collect();
    let svg = line_chart_svg("test MSE by window size", &[("mse", &values)]);
    write_file(&dir.join("window_sweep.svg"), &svg)
}

/// Top-30 indicator census CSV + SVG.
pub fn emit_census(dir: &Path, census: &[(String, f64)]) -> Result<(), CliError> {
    let top: Vec<&(String, f64)> = census.iter().take(30).collect();
    let mut csv = String::from("indicator,percent\n");
    for (name, pct) in &top {
        csv.push_str(&format!("{name},{pct}\n"));
    }
    write_file(&dir.join("census.csv"), &csv)?;
    let values: Vec<f64> = top.iter().map(|(_, pct)| *pct).collect();
    let svg = line_chart_svg("selection percentage by indicator (descending)", &[(
        "percent", &values,
    )]);
    write_file(&dir.join("census.svg"), &svg)
}
