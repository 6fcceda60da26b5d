//! Daily OHLCV series: CSV loading, validation, and mean imputation.
//!
//! Input CSV schema (UTF-8, comma-separated, header exact):
//! `Date,Open,High,Low,Close,Adj Close,Volume`, dates as `YYYY-MM-DD`.
//! Blank or unparseable numeric cells become missing markers (NaN) and
//! are later replaced by the column mean.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"];

/// Parallel-array OHLCV series keyed by strictly increasing calendar dates.
///
/// Missing values are NaN. Volume is kept as `f64` so a missing cell can be
/// mean-imputed like any other column.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
    pub adj_close: Vec<f64>,
    pub volume: Vec<f64>,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Check the type invariants: equal lengths, strictly increasing dates,
    /// high >= low and volume >= 0 where both sides are present.
    pub fn validate(&self) -> Result<()> {
        let n = self.dates.len();
        if n == 0 {
            return Err(Error::EmptyInput("price series has no rows".into()));
        }
        for v in [
            &self.open,
            &self.high,
            &self.low,
            &self.close,
            &self.adj_close,
            &self.volume,
        ] {
            if v.len() != n {
                return Err(Error::Shape(format!(
                    "column length {} != date length {}",
                    v.len(),
                    n
                )));
            }
        }
        for i in 1..n {
            if self.dates[i] <= self.dates[i - 1] {
                return Err(Error::Ordering(format!(
                    "dates not strictly increasing at row {} ({} then {})",
                    i,
                    self.dates[i - 1],
                    self.dates[i]
                )));
            }
        }
        for i in 0..n {
            if self.high[i].is_finite() && self.low[i].is_finite() && self.high[i] < self.low[i] {
                return Err(Error::NumericInput(format!(
                    "high < low on {}",
                    self.dates[i]
                )));
            }
            if self.volume[i].is_finite() && self.volume[i] < 0.0 {
                return Err(Error::NumericInput(format!(
                    "negative volume on {}",
                    self.dates[i]
                )));
            }
        }
        Ok(())
    }

    /// Rows whose date lies in `[start, end]` (inclusive).
    pub fn slice_dates(&self, start: NaiveDate, end: NaiveDate) -> Result<PriceSeries> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.dates[i] >= start && self.dates[i] <= end)
            .collect();
        if idx.is_empty() {
            return Err(Error::EmptyInput(format!(
                "no rows between {start} and {end}"
            )));
        }
        let pick = |v: &Vec<f64>| idx.iter().map(|&i| v[i]).collect();
        Ok(PriceSeries {
            dates: idx.iter().map(|&i| self.dates[i]).collect(),
            open: pick(&self.open),
            high: pick(&self.high),
            low: pick(&self.low),
            close: pick(&self.close),
            adj_close: pick(&self.adj_close),
            volume: pick(&self.volume),
        })
    }

    /// Replace every missing entry by the arithmetic mean of its column's
    /// non-missing entries. Errors if a column has no usable value at all.
    pub fn impute_missing(&self) -> Result<PriceSeries> {
        let mut out = self.clone();
        for (name, col) in [
            ("Open", &mut out.open),
            ("High", &mut out.high),
            ("Low", &mut out.low),
            ("Close", &mut out.close),
            ("Adj Close", &mut out.adj_close),
            ("Volume", &mut out.volume),
        ] {
            impute_column(col).map_err(|_| Error::DegenerateColumn(name.to_string()))?;
        }
        Ok(out)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(CSV_HEADER)?;
        let fmt = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
        for i in 0..self.len() {
            wtr.write_record([
                self.dates[i].format("%Y-%m-%d").to_string(),
                fmt(self.open[i]),
                fmt(self.high[i]),
                fmt(self.low[i]),
                fmt(self.close[i]),
                fmt(self.adj_close[i]),
                fmt(self.volume[i]),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Mean-impute one column in place. Errors when every entry is missing.
pub fn impute_column(col: &mut [f64]) -> Result<()> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in col.iter() {
        if v.is_finite() {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DegenerateColumn("all values missing".into()));
    }
    let mean = sum / count as f64;
    for v in col.iter_mut() {
        if !v.is_finite() {
            *v = mean;
        }
    }
    Ok(())
}

/// Load a daily OHLCV CSV.
///
/// Unparseable numeric cells become NaN (imputed later) rather than errors;
/// schema and date-order violations are hard errors.
pub fn load_ohlcv<P: AsRef<Path>>(path: P) -> Result<PriceSeries> {
    let file = std::fs::File::open(path.as_ref())?;
    read_ohlcv(file)
}

/// Same as [`load_ohlcv`] but from any reader.
pub fn read_ohlcv<R: std::io::Read>(reader: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(Error::EmptyInput("empty csv file".into()));
    }
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != CSV_HEADER {
        return Err(Error::Schema(format!(
            "expected header {:?}, got {:?}",
            CSV_HEADER.join(","),
            got.join(",")
        )));
    }

    let mut series = PriceSeries {
        dates: Vec::new(),
        open: Vec::new(),
        high: Vec::new(),
        low: Vec::new(),
        close: Vec::new(),
        adj_close: Vec::new(),
        volume: Vec::new(),
    };

    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Schema(format!(
                "row {}: expected {} fields, got {}",
                line + 2,
                CSV_HEADER.len(),
                record.len()
            )));
        }
        let date = NaiveDate::parse_from_str(record[0].trim(), "%Y-%m-%d").map_err(|e| {
            Error::Schema(format!("row {}: bad date {:?}: {e}", line + 2, &record[0]))
        })?;
        if let Some(&last) = series.dates.last() {
            if date <= last {
                return Err(Error::Ordering(format!(
                    "row {}: date {} not after {}",
                    line + 2,
                    date,
                    last
                )));
            }
        }
        series.dates.push(date);
        series.open.push(parse_cell(&record[1]));
        series.high.push(parse_cell(&record[2]));
        series.low.push(parse_cell(&record[3]));
        series.close.push(parse_cell(&record[4]));
        series.adj_close.push(parse_cell(&record[5]));
        series.volume.push(parse_cell(&record[6]));
    }

    series.validate()?;
    Ok(series)
}

fn parse_cell(s: &str) -> f64 {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("null") || t.eq_ignore_ascii_case("nan") {
        return f64::NAN;
    }
    t.parse().unwrap_or(f64::NAN)
}
