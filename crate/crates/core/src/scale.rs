//! Min-max scaling fitted on one data range and applied to another.
//!
//! The transform maps the fitted `[min, max]` onto `[0, 1]` with no
//! clipping, so values outside the fitted range land outside `[0, 1]`.
//! A zero-range (constant) column maps to 0 everywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FeatureFrame;

/// Fitted range of a single column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaler {
    pub min: f64,
    pub max: f64,
}

impl ColumnScaler {
    /// Fit on the finite entries of `values`.
    pub fn fit(values: &[f64]) -> Result<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in values {
            if v.is_finite() {
                min = min.min(v);
                max = max.max(v);
            }
        }
        if !min.is_finite() {
            return Err(Error::DegenerateColumn("no finite values to fit".into()));
        }
        Ok(Self { min, max })
    }

    #[inline]
    pub fn transform(&self, x: f64) -> f64 {
        let range = self.max - self.min;
        if range == 0.0 {
            if x.is_nan() { x } else { 0.0 }
        } else {
            (x - self.min) / range
        }
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        let range = self.max - self.min;
        if range == 0.0 {
            if y.is_nan() { y } else { self.min }
        } else {
            self.min + y * range
        }
    }

    pub fn transform_vec(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.transform(v)).collect()
    }

    pub fn inverse_vec(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.inverse(v)).collect()
    }
}

/// Per-column min/max observed on the fitting frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<String>,
    pub scalers: Vec<ColumnScaler>,
}

/// Fit per-column ranges on `frame`.
pub fn minmax_fit(frame: &FeatureFrame) -> Result<ScalerParams> {
    if frame.is_empty() || frame.width() == 0 {
        return Err(Error::EmptyInput("cannot fit scaler on empty frame".into()));
    }
    let mut columns = Vec::with_capacity(frame.width());
    let mut scalers = Vec::with_capacity(frame.width());
    for col in &frame.columns {
        columns.push(col.name.clone());
        scalers.push(
            ColumnScaler::fit(&col.values).map_err(|_| Error::DegenerateColumn(col.name.clone()))?,
        );
    }
    Ok(ScalerParams { columns, scalers })
}

/// Apply fitted ranges column-by-column. Column names and order must match
/// the params exactly.
pub fn minmax_transform(frame: &FeatureFrame, params: &ScalerParams) -> Result<FeatureFrame> {
    check_columns(frame, params)?;
    let mut out = frame.clone();
    for (col, scaler) in out.columns.iter_mut().zip(&params.scalers) {
        col.values = scaler.transform_vec(&col.values);
    }
    Ok(out)
}

/// Undo [`minmax_transform`].
pub fn minmax_inverse(frame: &FeatureFrame, params: &ScalerParams) -> Result<FeatureFrame> {
    check_columns(frame, params)?;
    let mut out = frame.clone();
    for (col, scaler) in out.columns.iter_mut().zip(&params.scalers) {
        col.values = scaler.inverse_vec(&col.values);
    }
    Ok(out)
}

fn check_columns(frame: &FeatureFrame, params: &ScalerParams) -> Result<()> {
    let names: Vec<&str> = frame.columns.iter().map(|c| c.name.as_str()).collect();
    let fitted: Vec<&str> = params.columns.iter().map(String::as_str).collect();
    if names != fitted {
        return Err(Error::Schema(format!(
            "frame columns {:?} do not match fitted columns {:?}",
            names, fitted
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::FeatureColumn;
    use chrono::NaiveDate;

    fn frame_of(values: Vec<f64>) -> FeatureFrame {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let mut f = FeatureFrame::new(
            (0..values.len())
                .map(|i| start + chrono::Days::new(i as u64))
                .collect(),
        );
        f.push_column(FeatureColumn {
            name: "x".into(),
            group: "x".into(),
            values,
        })
        .unwrap();
        f
    }

    #[test]
    fn endpoints_and_midpoint() {
        let f = frame_of(vec![-2.0, 0.0, 2.0]);
        let p = minmax_fit(&f).unwrap();
        let t = minmax_transform(&f, &p).unwrap();
        assert_eq!(t.column("x").unwrap().values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let f = frame_of(vec![5.0, 5.0, 5.0]);
        let p = minmax_fit(&f).unwrap();
        let t = minmax_transform(&f, &p).unwrap();
        assert_eq!(t.column("x").unwrap().values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_extrapolates() {
        let s = ColumnScaler::fit(&[0.0, 10.0]).unwrap();
        assert!((s.transform(12.0) - 1.2).abs() < 1e-15);
        assert!((s.transform(-5.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn round_trip_recovers_input() {
        let f = frame_of(vec![3.25, -1.5, 9.0, 4.75]);
        let p = minmax_fit(&f).unwrap();
        let t = minmax_transform(&f, &p).unwrap();
        let back = minmax_inverse(&t, &p).unwrap();
        for (a, b) in back
            .column("x")
            .unwrap()
            .values
            .iter()
            .zip(&f.column("x").unwrap().values)
        {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn column_mismatch_is_schema_error() {
        let f = frame_of(vec![1.0, 2.0]);
        let mut p = minmax_fit(&f).unwrap();
        p.columns[0] = "y".into();
        assert!(minmax_transform(&f, &p).is_err());
    }
}
