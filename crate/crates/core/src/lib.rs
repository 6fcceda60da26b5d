//! Technical-indicator feature engineering, greedy wrapper feature
//! selection, and a ten-family regression suite for daily OHLCV data.
//!
//! The pipeline: load and impute an OHLCV CSV ([`series`]), compute an
//! indicator frame ([`indicators`]), min-max scale it ([`scale`]), flatten
//! sliding windows into a supervised dataset ([`window`]), then search
//! indicator subsets with SFS/SBS ([`select`]) scored by cross-validated
//! error metrics ([`evaluate`]) over any of the ten regressors
//! ([`regress`]).

pub mod error;
pub mod evaluate;
pub mod frame;
pub mod indicators;
pub mod matrix;
pub mod regress;
pub mod rng;
pub mod scale;
pub mod select;
pub mod series;
pub mod window;

pub use error::{Error, Result};
