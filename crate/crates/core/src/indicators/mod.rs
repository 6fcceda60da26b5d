//! Indicator registry: named, parameterized transforms from a
//! [`PriceSeries`] to [`FeatureFrame`] columns.
//!
//! The registry ships with a native set (see [`native::native_names`]) and
//! accepts user registrations through [`IndicatorRegistry::register`]. It
//! is meant to be built once and then shared immutably; compute calls are
//! pure and thread-safe.

mod native;
pub mod ops;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FeatureColumn, FeatureFrame};
use crate::series::PriceSeries;

pub use native::native_names;

/// A registry key plus parameter overrides, e.g. `sma(length=3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub name: String,
    /// Overrides in written order; params not listed keep their defaults.
    pub params: Vec<(String, f64)>,
}

impl IndicatorSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.push((key.to_string(), value));
        self
    }

    /// Parse `name` or `name(key=value, ...)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::InvalidParam("empty indicator spec".into()));
        }
        let (name, rest) = match text.find('(') {
            None => (text, ""),
            Some(open) => {
                if !text.ends_with(')') {
                    return Err(Error::InvalidParam(format!(
                        "unbalanced parentheses in {text:?}"
                    )));
                }
                (&text[..open], &text[open + 1..text.len() - 1])
            }
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::InvalidParam(format!("missing name in {text:?}")));
        }
        let mut spec = IndicatorSpec::new(name);
        for part in rest.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!("expected key=value, got {part:?}"))
            })?;
            let value: f64 = v.trim().parse().map_err(|_| {
                Error::InvalidParam(format!("non-numeric value in {part:?}"))
            })?;
            spec.params.push((k.trim().to_string(), value));
        }
        Ok(spec)
    }
}

/// Resolved parameter set: every parameter the definition declares, in
/// declaration order, with overrides applied.
#[derive(Debug, Clone)]
pub struct Params(Vec<(String, f64)>);

impl Params {
    pub fn get(&self, key: &str) -> f64 {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("parameter {key} not declared"))
    }

    pub fn usize(&self, key: &str) -> usize {
        self.get(key) as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, f64)> {
        self.0.iter()
    }
}

type WarmupFn = Box<dyn Fn(&Params) -> usize + Send + Sync>;
type ComputeFn = Box<dyn Fn(&Params, &PriceSeries) -> Vec<Vec<f64>> + Send + Sync>;

/// An indicator definition: declared parameters with defaults, output
/// suffixes (empty string = the bare indicator id), a warm-up bound, and
/// the compute function itself.
pub struct IndicatorDef {
    params: Vec<(String, f64)>,
    suffixes: Vec<String>,
    warmup: WarmupFn,
    compute: ComputeFn,
}

impl IndicatorDef {
    pub fn new<W, C>(
        params: &[(&str, f64)],
        suffixes: Vec<String>,
        warmup: W,
        compute: C,
    ) -> Self
    where
        W: Fn(&Params) -> usize + Send + Sync + 'static,
        C: Fn(&Params, &PriceSeries) -> Vec<Vec<f64>> + Send + Sync + 'static,
    {
        Self {
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            suffixes,
            warmup: Box::new(warmup),
            compute: Box::new(compute),
        }
    }

    fn resolve(&self, spec: &IndicatorSpec) -> Result<Params> {
        let mut values: Vec<(String, f64)> = self.params.clone();
        for (key, value) in &spec.params {
            let slot = values.iter_mut().find(|(k, _)| k == key).ok_or_else(|| {
                Error::InvalidParam(format!(
                    "indicator {} has no parameter {key:?}",
                    spec.name
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "{}.{key} must be finite",
                    spec.name
                )));
            }
            // Integer-valued defaults mark length-like parameters.
            if slot.1.fract() == 0.0 && slot.1 >= 1.0 && (*value < 1.0 || value.fract() != 0.0) {
                return Err(Error::InvalidParam(format!(
                    "{}.{key} must be an integer >= 1, got {value}",
                    spec.name
                )));
            }
            slot.1 = *value;
        }
        Ok(Params(values))
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e12 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Name -> definition map. Build once (defaults plus any extensions), then
/// treat as immutable.
pub struct IndicatorRegistry {
    defs: BTreeMap<String, IndicatorDef>,
}

impl IndicatorRegistry {
    /// Empty registry; useful for fully custom rosters.
    pub fn empty() -> Self {
        Self {
            defs: BTreeMap::new(),
        }
    }

    /// Registry preloaded with the native indicator set.
    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        native::install_native(&mut reg);
        reg
    }

    /// Register a new definition under `name`. Names are unique.
    pub fn register(&mut self, name: &str, def: IndicatorDef) -> Result<()> {
        if self.defs.contains_key(name) {
            return Err(Error::Conflict(format!("{name} is already registered")));
        }
        self.defs.insert(name.to_string(), def);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    fn def(&self, name: &str) -> Result<&IndicatorDef> {
        self.defs
            .get(name)
            .ok_or_else(|| Error::UnknownIndicator(name.to_string()))
    }

    /// Stable column id for a spec: name plus the resolved parameter values.
    pub fn spec_id(&self, spec: &IndicatorSpec) -> Result<String> {
        let def = self.def(&spec.name)?;
        let params = def.resolve(spec)?;
        let mut id = spec.name.clone();
        for (_, v) in params.iter() {
            id.push('_');
            id.push_str(&fmt_num(*v));
        }
        Ok(id)
    }

    /// Output column names a spec will produce, without computing anything.
    pub fn output_names(&self, spec: &IndicatorSpec) -> Result<Vec<String>> {
        let def = self.def(&spec.name)?;
        let id = self.spec_id(spec)?;
        Ok(def
            .suffixes
            .iter()
            .map(|s| {
                if s.is_empty() {
                    id.clone()
                } else {
                    format!("{id}_{s}")
                }
            })
            .collect())
    }

    /// Leading rows of NaN the spec produces on a fresh series.
    pub fn warmup(&self, spec: &IndicatorSpec) -> Result<usize> {
        let def = self.def(&spec.name)?;
        let params = def.resolve(spec)?;
        Ok((def.warmup)(&params))
    }

    /// Compute one spec into a frame aligned with the input dates.
    ///
    /// Entry `t` of every output depends only on rows `<= t`.
    pub fn compute(&self, spec: &IndicatorSpec, series: &PriceSeries) -> Result<FeatureFrame> {
        let def = self.def(&spec.name)?;
        let params = def.resolve(spec)?;
        let warmup = (def.warmup)(&params);
        if series.len() <= warmup {
            return Err(Error::InsufficientHistory {
                required: warmup + 1,
                actual: series.len(),
            });
        }
        let values = (def.compute)(&params, series);
        debug_assert_eq!(values.len(), def.suffixes.len());
        let names = self.output_names(spec)?;
        let mut frame = FeatureFrame::new(series.dates.clone());
        for (name, col) in names.into_iter().zip(values) {
            debug_assert_eq!(col.len(), series.len());
            frame.push_column(FeatureColumn {
                name,
                group: spec.name.clone(),
                values: col,
            })?;
        }
        Ok(frame)
    }

    /// Compute all specs in order into one frame. Raw OHLCV columns are
    /// never part of the output; they only feed the computation.
    pub fn compute_all(
        &self,
        specs: &[IndicatorSpec],
        series: &PriceSeries,
    ) -> Result<FeatureFrame> {
        if specs.is_empty() {
            return Err(Error::EmptyInput("no indicator specs given".into()));
        }
        let mut frame = FeatureFrame::new(series.dates.clone());
        for spec in specs {
            let part = self.compute(spec, series)?;
            for col in part.columns {
                frame.push_column(col)?;
            }
        }
        Ok(frame)
    }
}

/// The default experiment roster: every native indicator with its default
/// parameters.
pub fn default_roster() -> Vec<IndicatorSpec> {
    native_names().into_iter().map(IndicatorSpec::new).collect()
}

/// Parse a roster file body: one spec per line, `#` comments and blank
/// lines ignored.
pub fn parse_roster(text: &str) -> Result<Vec<IndicatorSpec>> {
    let mut specs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        specs.push(IndicatorSpec::parse(line)?);
    }
    if specs.is_empty() {
        return Err(Error::EmptyInput("roster has no indicator specs".into()));
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(close: Vec<f64>) -> PriceSeries {
        let n = close.len();
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        PriceSeries {
            dates: (0..n).map(|i| start + chrono::Days::new(i as u64)).collect(),
            open: close.clone(),
            high: close.iter().map(|c| c + 1.0).collect(),
            low: close.iter().map(|c| c - 1.0).collect(),
            adj_close: close.clone(),
            volume: vec![100.0; n],
            close,
        }
    }

    #[test]
    fn sma_on_constant_series() {
        let reg = IndicatorRegistry::with_defaults();
        let spec = IndicatorSpec::parse("sma(length=3)").unwrap();
        let f = reg.compute(&spec, &series(vec![2.0, 2.0, 2.0, 2.0])).unwrap();
        let v = &f.column("sma_3").unwrap().values;
        assert!(v[0].is_nan() && v[1].is_nan());
        assert_eq!(&v[2..], &[2.0, 2.0]);
    }

    #[test]
    fn rsi_is_100_on_strictly_increasing() {
        let reg = IndicatorRegistry::with_defaults();
        let close: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let f = reg
            .compute(&IndicatorSpec::new("rsi"), &series(close))
            .unwrap();
        for v in &f.column("rsi_14").unwrap().values[14..] {
            assert_eq!(*v, 100.0);
        }
    }

    #[test]
    fn unknown_indicator_errors() {
        let reg = IndicatorRegistry::with_defaults();
        match reg.compute(&IndicatorSpec::new("foo"), &series(vec![1.0; 10])) {
            Err(Error::UnknownIndicator(_)) => {}
            other => panic!("expected unknown indicator, got {other:?}"),
        }
    }

    #[test]
    fn short_series_is_insufficient_history() {
        let reg = IndicatorRegistry::with_defaults();
        match reg.compute(&IndicatorSpec::new("sma"), &series(vec![1.0; 5])) {
            Err(Error::InsufficientHistory { required: 10, actual: 5 }) => {}
            other => panic!("expected insufficient history, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_registration_conflicts() {
        let mut reg = IndicatorRegistry::with_defaults();
        let dup = IndicatorDef::new(&[], vec![String::new()], |_| 0, |_, s| {
            vec![s.close.clone()]
        });
        match reg.register("sma", dup) {
            Err(Error::Conflict(_)) => {}
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn user_registered_indicator_computes() {
        let mut reg = IndicatorRegistry::with_defaults();
        reg.register(
            "close_copy",
            IndicatorDef::new(&[], vec![String::new()], |_| 0, |_, s| {
                vec![s.close.clone()]
            }),
        )
        .unwrap();
        let f = reg
            .compute(&IndicatorSpec::new("close_copy"), &series(vec![1.0, 2.0]))
            .unwrap();
        assert_eq!(f.column("close_copy").unwrap().values, vec![1.0, 2.0]);
    }

    #[test]
    fn compute_all_concatenates_in_spec_order() {
        let reg = IndicatorRegistry::with_defaults();
        let specs = vec![
            IndicatorSpec::parse("sma(length=3)").unwrap(),
            IndicatorSpec::parse("mom(length=2)").unwrap(),
        ];
        let f = reg
            .compute_all(&specs, &series((1..=10).map(|i| i as f64).collect()))
            .unwrap();
        assert_eq!(f.column_names(), vec!["sma_3", "mom_2"]);
        assert_eq!(f.width(), 2);
    }

    #[test]
    fn compute_all_duplicate_outputs_is_schema_error() {
        let reg = IndicatorRegistry::with_defaults();
        let specs = vec![IndicatorSpec::new("obv"), IndicatorSpec::new("obv")];
        match reg.compute_all(&specs, &series(vec![1.0; 20])) {
            Err(Error::Schema(_)) => {}
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn default_registry_column_count_matches_metadata() {
        let reg = IndicatorRegistry::with_defaults();
        let roster = default_roster();
        let close: Vec<f64> = (0..300).map(|i| 50.0 + (i as f64 * 0.7).sin() * 5.0).collect();
        let f = reg.compute_all(&roster, &series(close)).unwrap();
        let expected: usize = roster
            .iter()
            .map(|s| reg.output_names(s).unwrap().len())
            .sum();
        assert_eq!(f.width(), expected);
    }

    #[test]
    fn parse_spec_with_params() {
        let spec = IndicatorSpec::parse("bbands(length=20, std=2.5)").unwrap();
        assert_eq!(spec.name, "bbands");
        assert_eq!(spec.params, vec![("length".into(), 20.0), ("std".into(), 2.5)]);
    }

    #[test]
    fn bad_param_name_rejected() {
        let reg = IndicatorRegistry::with_defaults();
        let spec = IndicatorSpec::parse("sma(window=5)").unwrap();
        assert!(reg.compute(&spec, &series(vec![1.0; 10])).is_err());
    }

    #[test]
    fn zero_length_rejected() {
        let reg = IndicatorRegistry::with_defaults();
        let spec = IndicatorSpec::parse("sma(length=0)").unwrap();
        assert!(reg.warmup(&spec).is_err());
    }
}
