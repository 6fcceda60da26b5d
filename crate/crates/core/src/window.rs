//! Sliding-window conversion of a feature frame into a flat supervised
//! dataset.
//!
//! Row `i` holds, for each indicator column, its values on days
//! `i..i+w-1`, flattened column-major with lag ascending inside each
//! column (`x@0` = most recent in-window day). The target is the close
//! `h` days after the window's last day, so sample `i` pairs features
//! from days `<= i+w-1` with the close of day `i+w-1+h`.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::frame::FeatureFrame;
use crate::matrix::Matrix;

/// Window length `w` and prediction horizon `h`, both in days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub w: usize,
    pub h: usize,
}

impl WindowSpec {
    pub fn new(w: usize, h: usize) -> Result<Self> {
        if w < 1 || h < 1 {
            return Err(Error::InvalidParam(format!(
                "window size and horizon must be >= 1, got w={w}, h={h}"
            )));
        }
        Ok(Self { w, h })
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { w: 3, h: 3 }
    }
}

/// Flattened design matrix plus target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// `column@lag` per design-matrix column.
    pub feature_names: Vec<String>,
    /// Selection-group label per design-matrix column (the indicator that
    /// produced the underlying frame column).
    pub feature_groups: Vec<String>,
    /// Last in-window date of each sample row.
    pub sample_dates: Vec<NaiveDate>,
    pub spec: WindowSpec,
}

impl WindowedDataset {
    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn cols(&self) -> usize {
        self.x.cols()
    }

    /// Distinct group labels in first-appearance order.
    pub fn group_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for g in &self.feature_groups {
            if !out.contains(g) {
                out.push(g.clone());
            }
        }
        out
    }

    /// Column indices belonging to `group`.
    pub fn group_columns(&self, group: &str) -> Vec<usize> {
        (0..self.cols())
            .filter(|&c| self.feature_groups[c] == group)
            .collect()
    }

    /// Dataset restricted to the named groups (column order preserved).
    pub fn restrict_groups(&self, groups: &[String]) -> Result<WindowedDataset> {
        let known = self.group_names();
        for g in groups {
            if !known.contains(g) {
                return Err(Error::Reference(format!("unknown feature group {g:?}")));
            }
        }
        let cols: Vec<usize> = (0..self.cols())
            .filter(|&c| groups.contains(&self.feature_groups[c]))
            .collect();
        self.restrict_columns(&cols)
    }

    /// Dataset keeping only the given design-matrix columns.
    pub fn restrict_columns(&self, cols: &[usize]) -> Result<WindowedDataset> {
        Ok(WindowedDataset {
            x: self.x.select_columns(cols)?,
            y: self.y.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            feature_groups: cols
                .iter()
                .map(|&c| self.feature_groups[c].clone())
                .collect(),
            sample_dates: self.sample_dates.clone(),
            spec: self.spec,
        })
    }

    /// Dataset keeping only rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<WindowedDataset> {
        if start >= end || end > self.rows() {
            return Err(Error::Shape(format!(
                "row slice {start}..{end} out of range for {} rows",
                self.rows()
            )));
        }
        let idx: Vec<usize> = (start..end).collect();
        self.select_rows(&idx)
    }

    /// Dataset keeping the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<WindowedDataset> {
        if idx.is_empty() {
            return Err(Error::EmptyInput("row selection is empty".into()));
        }
        Ok(WindowedDataset {
            x: self.x.select_rows(idx)?,
            y: idx.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            feature_groups: self.feature_groups.clone(),
            sample_dates: idx.iter().map(|&i| self.sample_dates[i]).collect(),
            spec: self.spec,
        })
    }

    /// Serialize as CSV: feature names plus a final `target` column.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = self.feature_names.clone();
        header.push("target".to_string());
        wtr.write_record(&header)?;
        for i in 0..self.rows() {
            let mut rec: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.y[i].to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Build the supervised dataset. `targets` must be aligned with
/// `frame.dates` (one close per frame row).
pub fn make_windows(
    frame: &FeatureFrame,
    targets: &[f64],
    spec: WindowSpec,
) -> Result<WindowedDataset> {
    let n = frame.len();
    let (w, h) = (spec.w, spec.h);
    if targets.len() != n {
        return Err(Error::Shape(format!(
            "targets length {} != frame length {}",
            targets.len(),
            n
        )));
    }
    if n < w + h {
        return Err(Error::InsufficientHistory {
            required: w + h,
            actual: n,
        });
    }
    if !frame.is_complete() {
        return Err(Error::NumericInput(
            "frame has missing values; impute and drop warm-up first".into(),
        ));
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("targets contain non-finite values".into()));
    }

    let m = n - w - h + 1;
    let k = frame.width();
    let mut feature_names = Vec::with_capacity(k * w);
    let mut feature_groups = Vec::with_capacity(k * w);
    for col in &frame.columns {
        for lag in 0..w {
            feature_names.push(format!("{}@{lag}", col.name));
            feature_groups.push(col.group.clone());
        }
    }

    let mut x = Matrix::zeros(m, k * w);
    let mut y = Vec::with_capacity(m);
    let mut sample_dates = Vec::with_capacity(m);
    for i in 0..m {
        let last = i + w - 1;
        for (c, col) in frame.columns.iter().enumerate() {
            for lag in 0..w {
                x.set(i, c * w + lag, col.values[last - lag]);
            }
        }
        y.push(targets[last + h]);
        sample_dates.push(frame.dates[last]);
    }

    Ok(WindowedDataset {
        x,
        y,
        feature_names,
        feature_groups,
        sample_dates,
        spec,
    })
}

/// One dataset per window size, sharing the target policy.
pub fn window_size_sweep(
    frame: &FeatureFrame,
    targets: &[f64],
    sizes: &[usize],
    horizon: usize,
) -> Result<Vec<(usize, WindowedDataset)>> {
    sizes
        .iter()
        .map(|&w| Ok((w, make_windows(frame, targets, WindowSpec::new(w, horizon)?)?)))
        .collect()
}
