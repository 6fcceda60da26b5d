//! Ten regression families behind one fit/predict contract.
//!
//! Defaults mirror the tuned hyperparameters this project standardizes on
//! (alpha, depths, neighbor counts, ensemble sizes per family). Every fit
//! is deterministic given (config, data, seed); solvers that can run out
//! of iteration budget report `converged = false` on the model and log a
//! warning instead of failing.

mod ensemble;
mod knn;
mod linear;
pub mod mlp;
mod svr;
mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use linear::lasso_objective;
pub use tree::{DecisionTree, TreeParams};

/// The supported estimator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegressorFamily {
    #[serde(rename = "LR")]
    Lr,
    Ridge,
    Lasso,
    #[serde(rename = "DTR")]
    Dtr,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "MLP")]
    Mlp,
    #[serde(rename = "SVR")]
    Svr,
    #[serde(rename = "ADA")]
    Ada,
    #[serde(rename = "GBR")]
    Gbr,
    #[serde(rename = "RFR")]
    Rfr,
}

impl RegressorFamily {
    pub const ALL: [RegressorFamily; 10] = [
        RegressorFamily::Lr,
        RegressorFamily::Ridge,
        RegressorFamily::Lasso,
        RegressorFamily::Dtr,
        RegressorFamily::Knn,
        RegressorFamily::Mlp,
        RegressorFamily::Svr,
        RegressorFamily::Ada,
        RegressorFamily::Gbr,
        RegressorFamily::Rfr,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegressorFamily::Lr => "LR",
            RegressorFamily::Ridge => "Ridge",
            RegressorFamily::Lasso => "Lasso",
            RegressorFamily::Dtr => "DTR",
            RegressorFamily::Knn => "KNN",
            RegressorFamily::Mlp => "MLP",
            RegressorFamily::Svr => "SVR",
            RegressorFamily::Ada => "ADA",
            RegressorFamily::Gbr => "GBR",
            RegressorFamily::Rfr => "RFR",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .find(|f| f.as_str().to_ascii_lowercase() == lower)
            .copied()
            .ok_or_else(|| Error::InvalidParam(format!("unknown regressor family {s:?}")))
    }
}

impl std::fmt::Display for RegressorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Family, numeric hyperparameters, and a reproducibility seed.
///
/// Parameters are a flat name -> value map so grid search and the config
/// file can address them uniformly; [`RegressorConfig::validate`] enforces
/// the per-family constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    pub family: RegressorFamily,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl RegressorConfig {
    /// Tuned defaults for a family.
    pub fn new(family: RegressorFamily) -> Self {
        let mut params = BTreeMap::new();
        let mut p = |k: &str, v: f64| {
            params.insert(k.to_string(), v);
        };
        match family {
            RegressorFamily::Lr => {
                p("fit_intercept", 1.0);
            }
            RegressorFamily::Ridge => {
                p("alpha", 0.0);
                p("fit_intercept", 1.0);
            }
            RegressorFamily::Lasso => {
                p("alpha", 0.1);
                p("max_iter", 200.0);
                p("tol", 1e-4);
                p("fit_intercept", 1.0);
            }
            RegressorFamily::Dtr => {
                p("max_depth", 9.0);
                p("min_samples_leaf", 2.0);
                p("min_samples_split", 2.0);
            }
            RegressorFamily::Knn => {
                p("n_neighbors", 2.0);
                // Accepted for config compatibility; the brute-force
                // search does not use it.
                p("leaf_size", 10.0);
            }
            RegressorFamily::Mlp => {
                p("hidden", 50.0);
                p("alpha", 1.0);
                p("max_iter", 2000.0);
                p("tol", 1e-6);
                p("memory", 10.0);
            }
            RegressorFamily::Svr => {
                p("c", 0.1);
                p("gamma", 0.1);
                p("epsilon", 0.1);
                p("tol", 1e-3);
                p("max_iter", 100_000.0);
            }
            RegressorFamily::Ada => {
                p("n_estimators", 2000.0);
                p("learning_rate", 0.1);
                p("max_depth", 3.0);
                p("bootstrap", 1.0);
            }
            RegressorFamily::Gbr => {
                p("n_estimators", 2000.0);
                p("learning_rate", 0.1);
                p("max_leaf_nodes", 30.0);
                p("max_depth", 0.0); // 0 = unlimited, leaf cap governs
            }
            RegressorFamily::Rfr => {
                p("n_estimators", 1000.0);
                p("max_features", 20.0);
                p("min_samples_split", 2.0);
                p("min_samples_leaf", 1.0);
                p("bootstrap", 1.0);
            }
        }
        Self {
            family,
            params,
            seed: 1,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Desk-scale profile: ensembles capped at 50 members, MLP iteration
    /// budget trimmed. Model semantics are otherwise unchanged.
    pub fn fast(mut self) -> Self {
        let cap = |params: &mut BTreeMap<String, f64>, key: &str, max: f64| {
            if let Some(v) = params.get_mut(key) {
                *v = v.min(max);
            }
        };
        match self.family {
            RegressorFamily::Ada | RegressorFamily::Gbr | RegressorFamily::Rfr => {
                cap(&mut self.params, "n_estimators", 50.0);
            }
            RegressorFamily::Mlp => cap(&mut self.params, "max_iter", 300.0),
            RegressorFamily::Svr => cap(&mut self.params, "max_iter", 20_000.0),
            _ => {}
        }
        self
    }

    pub fn param(&self, key: &str) -> f64 {
        *self
            .params
            .get(key)
            .unwrap_or_else(|| panic!("{} has no parameter {key}", self.family))
    }

    pub fn param_usize(&self, key: &str) -> usize {
        self.param(key) as usize
    }

    fn param_flag(&self, key: &str) -> bool {
        self.params.get(key).map(|v| *v != 0.0).unwrap_or(false)
    }

    pub fn validate(&self) -> Result<()> {
        let defaults = RegressorConfig::new(self.family);
        for key in self.params.keys() {
            if !defaults.params.contains_key(key) {
                return Err(Error::InvalidParam(format!(
                    "{} has no parameter {key:?}",
                    self.family
                )));
            }
        }
        for (key, value) in &self.params {
            if !value.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "{}.{key} must be finite",
                    self.family
                )));
            }
        }
        let nonneg = |key: &str| -> Result<()> {
            if let Some(v) = self.params.get(key) {
                if *v < 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "{}.{key} must be >= 0",
                        self.family
                    )));
                }
            }
            Ok(())
        };
        let at_least = |key: &str, min: f64| -> Result<()> {
            if let Some(v) = self.params.get(key) {
                if *v < min {
                    return Err(Error::InvalidParam(format!(
                        "{}.{key} must be >= {min}",
                        self.family
                    )));
                }
            }
            Ok(())
        };
        nonneg("alpha")?;
        nonneg("max_depth")?;
        at_least("tol", 0.0)?;
        match self.family {
            RegressorFamily::Knn => at_least("n_neighbors", 1.0)?,
            RegressorFamily::Lasso | RegressorFamily::Mlp => at_least("max_iter", 1.0)?,
            RegressorFamily::Svr => {
                at_least("c", 0.0)?;
                at_least("gamma", 0.0)?;
                nonneg("epsilon")?;
            }
            RegressorFamily::Ada | RegressorFamily::Rfr => at_least("n_estimators", 1.0)?,
            // 0 estimators = the constant-mean baseline.
            RegressorFamily::Gbr => at_least("n_estimators", 0.0)?,
            _ => {}
        }
        if self.family == RegressorFamily::Mlp {
            at_least("hidden", 1.0)?;
        }
        Ok(())
    }
}

/// Solver bookkeeping carried on every fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub converged: bool,
}

impl TrainingMeta {
    fn exact() -> Self {
        Self {
            iterations: 1,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum FittedModel {
    Linear(linear::LinearModel),
    Tree(tree::DecisionTree),
    Knn(knn::KnnModel),
    Mlp(mlp::MlpModel),
    Svr(svr::SvrModel),
    Ada(ensemble::AdaModel),
    Gbr(ensemble::GbrModel),
    Rfr(ensemble::RfrModel),
}

/// A fitted, immutable estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorModel {
    pub family: RegressorFamily,
    pub feature_count: usize,
    pub meta: TrainingMeta,
    inner: FittedModel,
}

impl RegressorModel {
    /// Predict one value per row of `x`; `x` must have the training width.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.feature_count {
            return Err(Error::Shape(format!(
                "predict expects {} columns, got {}",
                self.feature_count,
                x.cols()
            )));
        }
        if !x.is_finite() {
            return Err(Error::NumericInput("predict input has non-finite values".into()));
        }
        let out = match &self.inner {
            FittedModel::Linear(m) => m.predict(x),
            FittedModel::Tree(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Mlp(m) => m.predict(x),
            FittedModel::Svr(m) => m.predict(x),
            FittedModel::Ada(m) => m.predict(x),
            FittedModel::Gbr(m) => m.predict(x),
            FittedModel::Rfr(m) => m.predict(x),
        };
        Ok(out)
    }

    /// Linear-family coefficients (slopes, intercept) when applicable.
    pub fn linear_coefficients(&self) -> Option<(&[f64], f64)> {
        match &self.inner {
            FittedModel::Linear(m) => Some((&m.coefficients, m.intercept)),
            _ => None,
        }
    }

    /// Versioned binary artifact: one format byte then JSON.
    pub fn save<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&[MODEL_FORMAT_VERSION])?;
        serde_json::to_writer(&mut w, self)?;
        Ok(())
    }

    pub fn load<R: std::io::Read>(mut r: R) -> Result<Self> {
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model format version {}",
                version[0]
            )));
        }
        Ok(serde_json::from_reader(r)?)
    }
}

pub const MODEL_FORMAT_VERSION: u8 = 1;

/// Fit `config` on the design matrix `x` and targets `y`.
pub fn fit(config: &RegressorConfig, x: &Matrix, y: &[f64]) -> Result<RegressorModel> {
    config.validate()?;
    if x.rows() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: x.rows(),
        });
    }
    if x.cols() < 1 {
        return Err(Error::Shape("design matrix has no columns".into()));
    }
    if y.len() != x.rows() {
        return Err(Error::Shape(format!(
            "y length {} != x rows {}",
            y.len(),
            x.rows()
        )));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("training data has non-finite values".into()));
    }

    let (inner, meta) = match config.family {
        RegressorFamily::Lr => {
            let m = linear::fit_lr(x, y, config.param_flag("fit_intercept"));
            (FittedModel::Linear(m), TrainingMeta::exact())
        }
        RegressorFamily::Ridge => {
            let m = linear::fit_ridge(
                x,
                y,
                config.param("alpha"),
                config.param_flag("fit_intercept"),
            );
            (FittedModel::Linear(m), TrainingMeta::exact())
        }
        RegressorFamily::Lasso => {
            let (m, meta) = linear::fit_lasso(
                x,
                y,
                config.param("alpha"),
                config.param_usize("max_iter"),
                config.param("tol"),
                config.param_flag("fit_intercept"),
            );
            (FittedModel::Linear(m), meta)
        }
        RegressorFamily::Dtr => {
            let params = TreeParams {
                max_depth: match config.param_usize("max_depth") {
                    0 => None,
                    d => Some(d),
                },
                min_samples_leaf: config.param_usize("min_samples_leaf").max(1),
                min_samples_split: config.param_usize("min_samples_split").max(2),
                max_leaf_nodes: None,
                max_features: None,
            };
            let m = tree::fit_tree(x, y, &params, None);
            (FittedModel::Tree(m), TrainingMeta::exact())
        }
        RegressorFamily::Knn => {
            let m = knn::fit_knn(x, y, config.param_usize("n_neighbors"))?;
            (FittedModel::Knn(m), TrainingMeta::exact())
        }
        RegressorFamily::Mlp => {
            let (m, meta) = mlp::fit_mlp(
                x,
                y,
                config.param_usize("hidden"),
                config.param("alpha"),
                config.param_usize("max_iter"),
                config.param("tol"),
                config.param_usize("memory"),
                config.seed,
            );
            (FittedModel::Mlp(m), meta)
        }
        RegressorFamily::Svr => {
            let (m, meta) = svr::fit_svr(
                x,
                y,
                config.param("c"),
                config.param("gamma"),
                config.param("epsilon"),
                config.param("tol"),
                config.param_usize("max_iter"),
            );
            (FittedModel::Svr(m), meta)
        }
        RegressorFamily::Ada => {
            let (m, meta) = ensemble::fit_ada(
                x,
                y,
                config.param_usize("n_estimators"),
                config.param("learning_rate"),
                config.param_usize("max_depth"),
                config.param_flag("bootstrap"),
                config.seed,
            );
            (FittedModel::Ada(m), meta)
        }
        RegressorFamily::Gbr => {
            let m = ensemble::fit_gbr(
                x,
                y,
                config.param_usize("n_estimators"),
                config.param("learning_rate"),
                config.param_usize("max_leaf_nodes"),
                config.param_usize("max_depth"),
            );
            (FittedModel::Gbr(m), TrainingMeta::exact())
        }
        RegressorFamily::Rfr => {
            let m = ensemble::fit_rfr(
                x,
                y,
                config.param_usize("n_estimators"),
                config.param_usize("max_features"),
                config.param_usize("min_samples_split"),
                config.param_usize("min_samples_leaf"),
                config.param_flag("bootstrap"),
                config.seed,
            );
            (FittedModel::Rfr(m), TrainingMeta::exact())
        }
    };

    if !meta.converged {
        log::warn!(
            "{} did not converge within {} iterations",
            config.family,
            meta.iterations
        );
    }

    Ok(RegressorModel {
        family: config.family,
        feature_count: x.cols(),
        meta,
        inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> (Matrix, Vec<f64>) {
        // y = 2x + 1 on 10 distinct points
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let x = Matrix::from_rows(&xs.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        let y = xs.iter().map(|v| 2.0 * v + 1.0).collect();
        (x, y)
    }

    #[test]
    fn lr_recovers_exact_line() {
        let (x, y) = line_data();
        let m = fit(&RegressorConfig::new(RegressorFamily::Lr), &x, &y).unwrap();
        let (coef, intercept) = m.linear_coefficients().unwrap();
        assert!((coef[0] - 2.0).abs() <= 1e-10);
        assert!((intercept - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn ridge_alpha_zero_equals_lr() {
        let mut rng = crate::rng::seeded(5);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| crate::rng::normal_vec(&mut rng, 4, 0.0, 1.0))
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 3.0 * r[0] - r[2] + 0.5 + 0.01 * r[3])
            .collect();
        let lr = fit(&RegressorConfig::new(RegressorFamily::Lr), &x, &y).unwrap();
        let ridge = fit(&RegressorConfig::new(RegressorFamily::Ridge), &x, &y).unwrap();
        let (cl, il) = lr.linear_coefficients().unwrap();
        let (cr, ir) = ridge.linear_coefficients().unwrap();
        for (a, b) in cl.iter().zip(cr) {
            assert!((a - b).abs() <= 1e-8);
        }
        assert!((il - ir).abs() <= 1e-8);
    }

    #[test]
    fn lasso_huge_alpha_gives_mean_model() {
        let (x, y) = line_data();
        let cfg = RegressorConfig::new(RegressorFamily::Lasso).with("alpha", 1e6);
        let m = fit(&cfg, &x, &y).unwrap();
        let (coef, intercept) = m.linear_coefficients().unwrap();
        assert_eq!(coef[0], 0.0);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((intercept - mean).abs() <= 1e-12);
    }

    #[test]
    fn knn_k1_memorizes_training_rows() {
        let (x, y) = line_data();
        let cfg = RegressorConfig::new(RegressorFamily::Knn).with("n_neighbors", 1.0);
        let m = fit(&cfg, &x, &y).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn dtr_memorizes_unique_rows() {
        let (x, y) = line_data();
        let cfg = RegressorConfig::new(RegressorFamily::Dtr)
            .with("max_depth", 64.0)
            .with("min_samples_leaf", 1.0);
        let m = fit(&cfg, &x, &y).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn gbr_zero_estimators_is_mean_baseline() {
        let (x, y) = line_data();
        let cfg = RegressorConfig::new(RegressorFamily::Gbr).with("n_estimators", 0.0);
        let m = fit(&cfg, &x, &y).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        for p in m.predict(&x).unwrap() {
            assert_eq!(p, mean);
        }
    }

    #[test]
    fn predict_rejects_wrong_width() {
        let (x, y) = line_data();
        let m = fit(&RegressorConfig::new(RegressorFamily::Lr), &x, &y).unwrap();
        let wide = Matrix::zeros(2, 3);
        assert!(matches!(m.predict(&wide), Err(Error::Shape(_))));
    }

    #[test]
    fn nonfinite_input_rejected() {
        let (mut x, y) = line_data();
        x.set(0, 0, f64::NAN);
        assert!(matches!(
            fit(&RegressorConfig::new(RegressorFamily::Lr), &x, &y),
            Err(Error::NumericInput(_))
        ));
    }

    #[test]
    fn lr_translation_equivariance() {
        let (x, y) = line_data();
        let m = fit(&RegressorConfig::new(RegressorFamily::Lr), &x, &y).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v + 17.5).collect();
        let m2 = fit(&RegressorConfig::new(RegressorFamily::Lr), &x, &shifted).unwrap();
        let p1 = m.predict(&x).unwrap();
        let p2 = m2.predict(&x).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a + 17.5 - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn model_save_load_round_trip() {
        let (x, y) = line_data();
        let m = fit(&RegressorConfig::new(RegressorFamily::Ridge), &x, &y).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert_eq!(buf[0], MODEL_FORMAT_VERSION);
        let back = RegressorModel::load(buf.as_slice()).unwrap();
        assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn unknown_param_rejected() {
        let cfg = RegressorConfig::new(RegressorFamily::Lr).with("bogus", 1.0);
        assert!(cfg.validate().is_err());
    }
}
