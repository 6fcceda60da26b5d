//! Date-aligned matrix of named indicator columns.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::series::impute_column;

/// One named indicator output, tagged with the registry entry (`group`)
/// that produced it so selection can move all of an indicator's columns
/// as a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumn {
    pub name: String,
    pub group: String,
    pub values: Vec<f64>,
}

/// Dated matrix of indicator values. Warm-up entries (before an indicator
/// has enough history) are NaN until [`FeatureFrame::drop_warmup`] removes
/// the leading rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureFrame {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<FeatureColumn>,
}

impl FeatureFrame {
    pub fn new(dates: Vec<NaiveDate>) -> Self {
        Self {
            dates,
            columns: Vec::new(),
        }
    }

    /// Number of rows (dates).
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Number of feature columns (`k`).
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Append a column; the name must be unique and the length must match.
    pub fn push_column(&mut self, col: FeatureColumn) -> Result<()> {
        if col.values.len() != self.dates.len() {
            return Err(Error::Shape(format!(
                "column {} has {} rows, frame has {}",
                col.name,
                col.values.len(),
                self.dates.len()
            )));
        }
        if self.columns.iter().any(|c| c.name == col.name) {
            return Err(Error::Schema(format!("duplicate column name {}", col.name)));
        }
        self.columns.push(col);
        Ok(())
    }

    /// Mean-impute every column independently; see [`impute_column`].
    pub fn impute_missing(&self) -> Result<FeatureFrame> {
        let mut out = self.clone();
        for col in &mut out.columns {
            impute_column(&mut col.values)
                .map_err(|_| Error::DegenerateColumn(col.name.clone()))?;
        }
        Ok(out)
    }

    /// Drop the leading rows in which any column is still missing.
    ///
    /// The cut is the maximum warm-up over all columns; rows after the cut
    /// are kept as-is. Errors when nothing remains.
    pub fn drop_warmup(&self) -> Result<FeatureFrame> {
        if self.is_empty() {
            return Err(Error::EmptyFrame("frame has no rows".into()));
        }
        let mut start = 0usize;
        for col in &self.columns {
            let first_valid = col.values.iter().position(|v| v.is_finite());
            match first_valid {
                Some(i) => start = start.max(i),
                None => return Err(Error::DegenerateColumn(col.name.clone())),
            }
        }
        if start >= self.len() {
            return Err(Error::EmptyFrame("all rows are warm-up".into()));
        }
        let mut out = FeatureFrame::new(self.dates[start..].to_vec());
        for col in &self.columns {
            out.push_column(FeatureColumn {
                name: col.name.clone(),
                group: col.group.clone(),
                values: col.values[start..].to_vec(),
            })?;
        }
        Ok(out)
    }

    /// True when no entry anywhere is missing.
    pub fn is_complete(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.values.iter().all(|v| v.is_finite()))
    }

    /// Rows whose date lies in `[start, end]` (inclusive).
    pub fn slice_dates(&self, start: NaiveDate, end: NaiveDate) -> Result<FeatureFrame> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.dates[i] >= start && self.dates[i] <= end)
            .collect();
        if idx.is_empty() {
            return Err(Error::EmptyFrame(format!(
                "no rows between {start} and {end}"
            )));
        }
        let mut out = FeatureFrame::new(idx.iter().map(|&i| self.dates[i]).collect());
        for col in &self.columns {
            out.push_column(FeatureColumn {
                name: col.name.clone(),
                group: col.group.clone(),
                values: idx.iter().map(|&i| col.values[i]).collect(),
            })?;
        }
        Ok(out)
    }

    /// Serialize as CSV with `Date` first; missing entries are blank cells.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["Date".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.dates[i].format("%Y-%m-%d").to_string()];
            for col in &self.columns {
                let v = col.values[i];
                rec.push(if v.is_nan() { String::new() } else { v.to_string() });
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        (0..n).map(|i| start + chrono::Days::new(i as u64)).collect()
    }

    fn col(name: &str, values: Vec<f64>) -> FeatureColumn {
        FeatureColumn {
            name: name.into(),
            group: name.into(),
            values,
        }
    }

    #[test]
    fn drop_warmup_uses_max_rule() {
        let mut f = FeatureFrame::new(dates(6));
        f.push_column(col("a", vec![f64::NAN, f64::NAN, f64::NAN, 1.0, 2.0, 3.0]))
            .unwrap();
        f.push_column(col("b", vec![f64::NAN, 1.0, 2.0, 3.0, 4.0, 5.0]))
            .unwrap();
        let d = f.drop_warmup().unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.column("a").unwrap().values, vec![1.0, 2.0, 3.0]);
        assert_eq!(d.column("b").unwrap().values, vec![3.0, 4.0, 5.0]);
        assert!(d.is_complete());
    }

    #[test]
    fn drop_warmup_identity_when_complete() {
        let mut f = FeatureFrame::new(dates(3));
        f.push_column(col("a", vec![1.0, 2.0, 3.0])).unwrap();
        let d = f.drop_warmup().unwrap();
        assert_eq!(d, f);
    }

    #[test]
    fn drop_warmup_everything_is_error() {
        let mut f = FeatureFrame::new(dates(2));
        f.push_column(col("a", vec![f64::NAN, f64::NAN])).unwrap();
        assert!(f.drop_warmup().is_err());
    }

    #[test]
    fn duplicate_column_rejected() {
        let mut f = FeatureFrame::new(dates(1));
        f.push_column(col("a", vec![1.0])).unwrap();
        assert!(f.push_column(col("a", vec![2.0])).is_err());
    }

    #[test]
    fn impute_fills_interior_gap() {
        let mut f = FeatureFrame::new(dates(3));
        f.push_column(col("a", vec![1.0, f64::NAN, 3.0])).unwrap();
        let i = f.impute_missing().unwrap();
        assert_eq!(i.column("a").unwrap().values, vec![1.0, 2.0, 3.0]);
    }
}
