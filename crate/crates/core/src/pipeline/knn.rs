//! Exhaustive 1-nearest-neighbour classification.

use crate::error::{Error, Result};
use crate::Matrix;

/// Labels each row of `test` with the label of its Euclidean-nearest row of
/// `train`. Ties go to the lowest training index.
pub fn knn1_predict<L: Clone>(train: &Matrix, train_labels: &[L], test: &Matrix) -> Result<Vec<L>> {
    if train.nrows() == 0 {
        return Err(Error::invalid("1NN needs a non-empty training set"));
    }
    if train_labels.len() != train.nrows() {
        return Err(Error::mismatch(format!(
            "{} training labels for {} training rows",
            train_labels.len(),
            train.nrows()
        )));
    }
    if train.ncols() != test.ncols() {
        return Err(Error::mismatch(format!(
            "training data has {} columns, test data {}",
            train.ncols(),
            test.ncols()
        )));
    }
    // Row-major copies keep the inner distance loop contiguous.
    let d = train.ncols();
    let train_rows: Vec<f64> = train.transpose().as_slice().to_vec();
    let test_rows = test.transpose();
    Ok(test_rows
        .column_iter()
        .map(|x| {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (i, t) in train_rows.chunks_exact(d).enumerate() {
                let dist: f64 = t.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist < best_dist {
                    best_dist = dist;
                    best = i;
                }
            }
            train_labels[best].clone()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_returns_its_label() {
        let train = Matrix::from_row_slice(3, 2, &[0.0, 0.0, 5.0, 5.0, -3.0, 1.0]);
        let test = Matrix::from_row_slice(1, 2, &[5.0, 5.0]);
        assert_eq!(knn1_predict(&train, &["a", "b", "c"], &test).unwrap(), vec!["b"]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let train = Matrix::from_row_slice(2, 1, &[-1.0, 1.0]);
        let test = Matrix::from_row_slice(1, 1, &[0.0]);
        assert_eq!(knn1_predict(&train, &[7, 3], &test).unwrap(), vec![7]);
    }

    #[test]
    fn xor_layout_against_distance_table() {
        let corners = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let labels = [0, 1, 1, 0];
        let train = Matrix::from_fn(4, 2, |i, j| corners[i][j]);
        let probes = [[0.1, 0.05], [0.2, 0.9], [0.95, 0.3], [0.7, 0.8], [1.0, 1.0]];
        let test = Matrix::from_fn(probes.len(), 2, |i, j| probes[i][j]);
        let pred = knn1_predict(&train, &labels, &test).unwrap();
        for (p, probe) in probes.iter().enumerate() {
            let dists: Vec<f64> = corners
                .iter()
                .map(|c| (c[0] - probe[0]).powi(2) + (c[1] - probe[1]).powi(2))
                .collect();
            let nearest = (0..4).min_by(|&a, &b| dists[a].total_cmp(&dists[b])).unwrap();
            assert_eq!(pred[p], labels[nearest]);
        }
    }

    #[test]
    fn error_cases() {
        let empty = Matrix::zeros(0, 2);
        let test = Matrix::zeros(1, 2);
        assert!(knn1_predict::<u8>(&empty, &[], &test).is_err());
        let train = Matrix::zeros(1, 3);
        assert!(knn1_predict(&train, &[1], &test).is_err());
        assert!(knn1_predict(&test, &[1, 2], &test).is_err());
    }
}
