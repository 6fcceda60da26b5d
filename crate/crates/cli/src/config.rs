//! Experiment configuration: a flat sectioned key-value file.
//!
//! ```text
//! [data]
//! input = data/prices.csv
//! selection_start = 2010-01-01      # optional; defaults split the input
//! selection_end = 2013-12-31        # chronologically in half
//! prediction_start = 2014-01-01
//! prediction_end = 2022-12-31
//! train_fraction = 0.70
//! scale_target = true
//! scaler_fit = train                # train | full
//! cv_shuffle = false                # shuffled CV folds (replication)
//! split_shuffle = false             # shuffled 70/30 split (replication)
//!
//! [window]
//! w = 3
//! h = 3
//! sweep = 2,3,5,10                  # optional window-size comparison
//!
//! [indicators]
//! roster = sma(length=10); rsi(length=14)   # inline, ';'-separated
//! roster_file = roster.txt                  # or one spec per line
//!                                           # neither: full native set
//! [selection]
//! methods = sfs, sbs
//! regressors = LR, Ridge
//! metrics = mse
//! cv_folds = 5
//! max_steps = 0                     # 0 = run to exhaustion
//! group_by = indicator              # indicator | column
//! scope = train                     # score on the train split | full partition
//!
//! [regressors.KNN]                  # per-family overrides
//! n_neighbors = 2
//!
//! [output]
//! dir = out
//! fast = false
//! seed = 1
//! ```
//!
//! Unknown sections or keys are rejected so typos fail loudly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use indsel::evaluate::Metric;
use indsel::indicators::{default_roster, parse_roster, IndicatorSpec};
use indsel::regress::{RegressorConfig, RegressorFamily};
use indsel::select::SelectionMethod;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    pub selection_range: Option<DateRange>,
    pub prediction_range: Option<DateRange>,
    pub train_fraction: f64,
    pub scale_target: bool,
    /// Fit the min-max scaler on the full partition instead of its
    /// training prefix (strict replication mode).
    pub scaler_fit_full: bool,
    pub cv_shuffle: bool,
    /// Seeded-shuffle train/test membership instead of the chronological
    /// split (replication mode).
    pub split_shuffle: bool,
    /// Score selection candidates on the selection partition's full
    /// sample set instead of its training split.
    pub selection_full_partition: bool,
    pub window_w: usize,
    pub window_h: usize,
    pub window_sweep: Vec<usize>,
    pub roster: Vec<IndicatorSpec>,
    pub methods: Vec<SelectionMethod>,
    pub regressors: Vec<RegressorFamily>,
    pub metrics: Vec<Metric>,
    pub cv_folds: usize,
    pub max_steps: Option<usize>,
    pub group_by_indicator: bool,
    pub regressor_overrides: BTreeMap<RegressorFamily, BTreeMap<String, f64>>,
    pub out_dir: PathBuf,
    pub fast: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            selection_range: None,
            prediction_range: None,
            train_fraction: 0.70,
            scale_target: true,
            scaler_fit_full: false,
            cv_shuffle: false,
            split_shuffle: false,
            selection_full_partition: false,
            window_w: 3,
            window_h: 3,
            window_sweep: Vec::new(),
            roster: default_roster(),
            methods: vec![SelectionMethod::Sfs, SelectionMethod::Sbs],
            regressors: RegressorFamily::ALL.to_vec(),
            metrics: Metric::ALL.to_vec(),
            cv_folds: 5,
            max_steps: None,
            group_by_indicator: true,
            regressor_overrides: BTreeMap::new(),
            out_dir: PathBuf::from("out"),
            fast: false,
            seed: 1,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_date(value: &str, key: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|e| config_err(format!("{key}: bad date {value:?}: {e}")))
}

fn parse_bool(value: &str, key: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(config_err(format!("{key}: expected true/false, got {other:?}"))),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| config_err(format!("{key}: bad number {value:?}")))
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse the sectioned key-value text. Relative paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        let mut roster_inline: Option<String> = None;
        let mut roster_file: Option<PathBuf> = None;
        let mut sel_start = None;
        let mut sel_end = None;
        let mut pred_start = None;
        let mut pred_end = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(config_err(format!("line {}: unclosed section", lineno + 1)));
                }
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();

            match (section.as_str(), key) {
                ("data", "input") => cfg.input = base_dir.join(value),
                ("data", "selection_start") => sel_start = Some(parse_date(value, key)?),
                ("data", "selection_end") => sel_end = Some(parse_date(value, key)?),
                ("data", "prediction_start") => pred_start = Some(parse_date(value, key)?),
                ("data", "prediction_end") => pred_end = Some(parse_date(value, key)?),
                ("data", "train_fraction") => cfg.train_fraction = parse_num(value, key)?,
                ("data", "scale_target") => cfg.scale_target = parse_bool(value, key)?,
                ("data", "scaler_fit") => {
                    cfg.scaler_fit_full = match value {
                        "train" => false,
                        "full" => true,
                        other => {
                            return Err(config_err(format!(
                                "scaler_fit: expected train|full, got {other:?}"
                            )))
                        }
                    }
                }
                ("data", "cv_shuffle") => cfg.cv_shuffle = parse_bool(value, key)?,
                ("data", "split_shuffle") => cfg.split_shuffle = parse_bool(value, key)?,
                ("window", "w") => cfg.window_w = parse_num(value, key)?,
                ("window", "h") => cfg.window_h = parse_num(value, key)?,
                ("window", "sweep") => {
                    cfg.window_sweep = split_list(value)
                        .map(|s| parse_num(s, key))
                        .collect::<Result<_, _>>()?
                }
                ("indicators", "roster") => roster_inline = Some(value.to_string()),
                ("indicators", "roster_file") => roster_file = Some(base_dir.join(value)),
                ("selection", "methods") => {
                    cfg.methods = split_list(value)
                        .map(|s| SelectionMethod::parse(s).map_err(|e| config_err(e.to_string())))
                        .collect::<Result<_, _>>()?
                }
                ("selection", "regressors") => {
                    cfg.regressors = split_list(value)
                        .map(|s| RegressorFamily::parse(s).map_err(|e| config_err(e.to_string())))
                        .collect::<Result<_, _>>()?
                }
                ("selection", "metrics") => {
                    cfg.metrics = split_list(value)
                        .map(|s| Metric::parse(s).map_err(|e| config_err(e.to_string())))
                        .collect::<Result<_, _>>()?
                }
                ("selection", "cv_folds") => cfg.cv_folds = parse_num(value, key)?,
                ("selection", "max_steps") => {
                    let steps: usize = parse_num(value, key)?;
                    cfg.max_steps = if steps == 0 { None } else { Some(steps) };
                }
                ("selection", "group_by") => {
                    cfg.group_by_indicator = match value {
                        "indicator" => true,
                        "column" => false,
                        other => {
                            return Err(config_err(format!(
                                "group_by: expected indicator|column, got {other:?}"
                            )))
                        }
                    }
                }
                ("selection", "scope") => {
                    cfg.selection_full_partition = match value {
                        "train" => false,
                        "full" => true,
                        other => {
                            return Err(config_err(format!(
                                "scope: expected train|full, got {other:?}"
                            )))
                        }
                    }
                }
                ("output", "dir") => cfg.out_dir = base_dir.join(value),
                ("output", "fast") => cfg.fast = parse_bool(value, key)?,
                ("output", "seed") => cfg.seed = parse_num(value, key)?,
                (sec, key) if sec.starts_with("regressors.") => {
                    let family = RegressorFamily::parse(&sec["regressors.".len()..])
                        .map_err(|e| config_err(e.to_string()))?;
                    let v: f64 = parse_num(value, key)?;
                    cfg.regressor_overrides
                        .entry(family)
                        .or_default()
                        .insert(key.to_string(), v);
                }
                (sec, key) => {
                    return Err(config_err(format!(
                        "line {}: unknown key {key:?} in section [{sec}]",
                        lineno + 1
                    )))
                }
            }
        }

        match (sel_start, sel_end) {
            (Some(start), Some(end)) => cfg.selection_range = Some(DateRange { start, end }),
            (None, None) => {}
            _ => return Err(config_err("selection_start/selection_end must come together")),
        }
        match (pred_start, pred_end) {
            (Some(start), Some(end)) => cfg.prediction_range = Some(DateRange { start, end }),
            (None, None) => {}
            _ => {
                return Err(config_err(
                    "prediction_start/prediction_end must come together",
                ))
            }
        }

        if let Some(inline) = roster_inline {
            let text = inline.replace(';', "\n");
            cfg.roster = parse_roster(&text).map_err(|e| config_err(e.to_string()))?;
        } else if let Some(file) = roster_file {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| config_err(format!("cannot read roster {}: {e}", file.display())))?;
            cfg.roster = parse_roster(&text).map_err(|e| config_err(e.to_string()))?;
        }

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.input.as_os_str().is_empty() {
            return Err(config_err("[data] input is required"));
        }
        if !(0.0 < self.train_fraction && self.train_fraction < 1.0) {
            return Err(config_err(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.window_w < 1 || self.window_h < 1 {
            return Err(config_err("window w and h must be >= 1"));
        }
        if self.cv_folds < 2 {
            return Err(config_err("cv_folds must be >= 2"));
        }
        if self.methods.is_empty() || self.regressors.is_empty() || self.metrics.is_empty() {
            return Err(config_err(
                "selection matrix is empty: need methods, regressors, and metrics",
            ));
        }
        if let (Some(sel), Some(pred)) = (&self.selection_range, &self.prediction_range) {
            if sel.start > sel.end || pred.start > pred.end {
                return Err(config_err("partition ranges must have start <= end"));
            }
            if sel.end >= pred.start {
                return Err(config_err(
                    "partitions must be chronologically ordered and non-overlapping \
                     (selection before prediction)",
                ));
            }
        }
        for (family, params) in &self.regressor_overrides {
            let mut config = RegressorConfig::new(*family);
            for (k, v) in params {
                config = config.with(k, *v);
            }
            config.validate().map_err(|e| config_err(e.to_string()))?;
        }
        Ok(())
    }

    /// Regressor defaults plus file overrides, seeded; fast caps applied
    /// when the fast profile is active.
    pub fn regressor_config(&self, family: RegressorFamily) -> RegressorConfig {
        let mut config = RegressorConfig::new(family).with_seed(self.seed);
        if let Some(overrides) = self.regressor_overrides.get(&family) {
            for (k, v) in overrides {
                config = config.with(k, *v);
            }
        }
        if self.fast {
            config = config.fast();
        }
        config
    }

    /// The (method, family, metric) selection matrix in config order.
    pub fn selection_matrix(
        &self,
    ) -> Vec<(SelectionMethod, RegressorFamily, Metric)> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &family in &self.regressors {
                for &metric in &self.metrics {
                    out.push((method, family, metric));
                }
            }
        }
        out
    }
}
