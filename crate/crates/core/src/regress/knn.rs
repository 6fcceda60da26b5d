//! Brute-force k-nearest-neighbor regression with Manhattan distance and
//! inverse-distance weighting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct KnnModel {
    k: usize,
    train_rows: Vec<Vec<f64>>,
    train_y: Vec<f64>,
}

pub(crate) fn fit_knn(x: &Matrix, y: &[f64], k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::InvalidParam("KNN.n_neighbors must be >= 1".into()));
    }
    if k > x.rows() {
        return Err(Error::InsufficientSamples {
            required: k,
            actual: x.rows(),
        });
    }
    Ok(KnnModel {
        k,
        train_rows: (0..x.rows()).map(|r| x.row(r).to_vec()).collect(),
        train_y: y.to_vec(),
    })
}

fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

impl KnnModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|r| self.predict_row(x.row(r))).collect()
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .train_rows
            .iter()
            .enumerate()
            .map(|(i, t)| (manhattan(row, t), i))
            .collect();
        // Stable neighbor choice: distance first, then training index.
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let nearest = &dist[..self.k];

        // A zero-distance neighbor takes the whole vote.
        let exact: Vec<usize> = nearest
            .iter()
            .filter(|(d, _)| *d == 0.0)
            .map(|(_, i)| *i)
            .collect();
        if !exact.is_empty() {
            return exact.iter().map(|&i| self.train_y[i]).sum::<f64>() / exact.len() as f64;
        }

        let mut num = 0.0;
        let mut den = 0.0;
        for (d, i) in nearest {
            let w = 1.0 / d;
            num += w * self.train_y[*i];
            den += w;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Matrix, Vec<f64>) {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 3.0]];
        let y = vec![1.0, 2.0, 3.0, 10.0];
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn k1_returns_nearest_target() {
        let (x, y) = data();
        let m = fit_knn(&x, &y, 1).unwrap();
        assert_eq!(m.predict(&x), y);
    }

    #[test]
    fn zero_distance_beats_other_neighbors() {
        let (x, y) = data();
        let m = fit_knn(&x, &y, 3).unwrap();
        // Query equals training row 0 exactly: prediction is y[0] even
        // though two more neighbors are in range.
        let q = Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(m.predict(&q), vec![1.0]);
    }

    #[test]
    fn inverse_distance_weighting() {
        let (x, y) = data();
        let m = fit_knn(&x, &y, 2).unwrap();
        // Query at (2,0): d0=2 (row1), d1=2+... row0 d=2? |2-0|+0=2 row1 |2-1|=1
        let q = Matrix::from_rows(&[vec![2.0, 0.0]]).unwrap();
        // neighbors: row1 d=1 (y=2), row0 d=2 (y=1)
        let expect = (1.0 / 1.0 * 2.0 + 1.0 / 2.0 * 1.0) / (1.0 / 1.0 + 1.0 / 2.0);
        assert!((m.predict(&q)[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn k_larger_than_train_is_error() {
        let (x, y) = data();
        assert!(fit_knn(&x, &y, 5).is_err());
    }
}
