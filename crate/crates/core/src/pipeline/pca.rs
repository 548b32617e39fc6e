//! Principal component projection for the 1NN+PCA baseline.

use nalgebra::linalg::SymmetricEigen;

use crate::error::{Error, Result};
use crate::solver::fix_sign;
use crate::Matrix;

/// Fitted principal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Matrix,
    /// `d x m`, leading directions first.
    pub components: Matrix,
    /// Variance along each component.
    pub variances: Vec<f64>,
}

impl Pca {
    /// Leading `m` eigenvectors of the population covariance of the rows of
    /// `features`, each signed so its largest-magnitude entry is positive.
    pub fn fit(features: &Matrix, m: usize) -> Result<Self> {
        let (n, d) = features.shape();
        if m < 1 || m > n.min(d) {
            return Err(Error::invalid(format!(
                "PCA dimension must satisfy 1 <= m <= min(n, d) = {}, got {m}",
                n.min(d)
            )));
        }
        let mean = features.row_mean();
        let centered = Matrix::from_fn(n, d, |i, j| features[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / n as f64;
        let cov = (&cov + cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(cov);
        let vals = eig.eigenvalues.as_slice();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        let mut components = Matrix::zeros(d, m);
        let mut variances = Vec::with_capacity(m);
        for (c, &k) in order.iter().take(m).enumerate() {
            let mut v = eig.eigenvectors.column(k).into_owned();
            fix_sign(v.as_mut_slice());
            components.set_column(c, &v);
            variances.push(vals[k]);
        }
        Ok(Self {
            mean: Matrix::from_row_slice(1, d, mean.as_slice()),
            components,
            variances,
        })
    }

    pub fn transform(&self, features: &Matrix) -> Result<Matrix> {
        if features.ncols() != self.components.nrows() {
            return Err(Error::mismatch(format!(
                "PCA fitted on {} columns, got {}",
                self.components.nrows(),
                features.ncols()
            )));
        }
        let centered = Matrix::from_fn(features.nrows(), features.ncols(), |i, j| {
            features[(i, j)] - self.mean[(0, j)]
        });
        Ok(centered * &self.components)
    }
}

/// Centers `features` and projects onto the `m` leading principal directions.
pub fn pca_project(features: &Matrix, m: usize) -> Result<Matrix> {
    Pca::fit(features, m)?.transform(features)
}
