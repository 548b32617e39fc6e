//! Antecedent side of the TSK fuzzy system: Gaussian memberships, rule firing
//! levels and the fuzzy design matrix.
//!
//! The mapped vector of an input `x` is the rule-major concatenation
//! `[w_1 * (1, x), w_2 * (1, x), ..., w_K * (1, x)]` where `w_k` is the
//! normalized firing level of rule `k`. This layout is part of the model file
//! contract.

use crate::error::{Error, Result};
use crate::varpart::AntecedentParams;
use crate::{Matrix, Vector};

/// Gaussian membership `exp(-(x - c)^2 / (2 * delta))`.
///
/// `delta` acts as a variance, not a standard deviation.
pub fn membership(x: f64, center: f64, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::invalid(format!("membership width must be positive, got {delta}")));
    }
    Ok((-(x - center).powi(2) / (2.0 * delta)).exp())
}

/// Raw and normalized firing levels of every rule for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Firing {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

/// Log of the product of memberships of `x` under each rule.
fn log_firing(x: &[f64], params: &AntecedentParams) -> Vec<f64> {
    let centers = params.centers();
    let widths = params.widths();
    (0..params.rules())
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, xi)| -(xi - centers[(k, i)]).powi(2) / (2.0 * widths[(k, i)]))
                .sum()
        })
        .collect()
}

fn normalize_log(log_raw: &[f64]) -> Vec<f64> {
    let max = log_raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_raw.iter().map(|e| (e - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        let k = log_raw.len();
        return vec![1.0 / k as f64; k];
    }
    shifted.iter().map(|v| v / total).collect()
}

/// Firing levels of each rule (product conjunction) and their normalization.
///
/// Normalization is computed from log firing levels shifted by their maximum,
/// so it stays well defined when every raw product underflows.
pub fn firing_levels(x: &[f64], params: &AntecedentParams) -> Result<Firing> {
    check_dim(x.len(), params)?;
    let log_raw = log_firing(x, params);
    Ok(Firing {
        raw: log_raw.iter().map(|e| e.exp()).collect(),
        normalized: normalize_log(&log_raw),
    })
}

fn check_dim(d: usize, params: &AntecedentParams) -> Result<()> {
    if d != params.dim() {
        return Err(Error::mismatch(format!(
            "input has {d} features, antecedents expect {}",
            params.dim()
        )));
    }
    Ok(())
}

fn write_mapped(x: &[f64], params: &AntecedentParams, out: &mut [f64]) {
    let weights = normalize_log(&log_firing(x, params));
    let block = x.len() + 1;
    for (k, w) in weights.iter().enumerate() {
        let dst = &mut out[k * block..(k + 1) * block];
        dst[0] = *w;
        for (o, xi) in dst[1..].iter_mut().zip(x) {
            *o = w * xi;
        }
    }
}

/// Maps one input into the `K(d+1)`-dimensional fuzzy feature space.
pub fn fuzzy_map(x: &[f64], params: &AntecedentParams) -> Result<Vector> {
    check_dim(x.len(), params)?;
    let mut out = Vector::zeros(params.rules() * (x.len() + 1));
    write_mapped(x, params, out.as_mut_slice());
    Ok(out)
}

/// Mapped data of one domain, one column per example.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyDesignMatrix {
    data: Matrix,
    rules: usize,
    dim: usize,
}

impl FuzzyDesignMatrix {
    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_data(self) -> Matrix {
        self.data
    }

    pub fn rules(&self) -> usize {
        self.rules
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of examples (columns).
    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    /// Row count `K(d+1)`.
    pub fn feature_dim(&self) -> usize {
        self.data.nrows()
    }

    /// Sum of the bias rows of column `j`; equals 1 for a valid matrix.
    pub fn bias_sum(&self, j: usize) -> f64 {
        (0..self.rules).map(|k| self.data[(k * (self.dim + 1), j)]).sum()
    }

    /// Wraps an existing matrix after checking its row count.
    pub fn from_matrix(data: Matrix, rules: usize, dim: usize) -> Result<Self> {
        if data.nrows() != rules * (dim + 1) {
            return Err(Error::mismatch(format!(
                "design matrix has {} rows, expected {}",
                data.nrows(),
                rules * (dim + 1)
            )));
        }
        Ok(Self { data, rules, dim })
    }

    /// Column-wise concatenation `[self, other]`.
    pub fn hconcat(&self, other: &FuzzyDesignMatrix) -> Result<FuzzyDesignMatrix> {
        if self.feature_dim() != other.feature_dim() {
            return Err(Error::mismatch("design matrices differ in row count"));
        }
        let mut data = Matrix::zeros(self.feature_dim(), self.n() + other.n());
        data.columns_mut(0, self.n()).copy_from(&self.data);
        data.columns_mut(self.n(), other.n()).copy_from(&other.data);
        Ok(FuzzyDesignMatrix {
            data,
            rules: self.rules,
            dim: self.dim,
        })
    }
}

/// Maps every row of `features` (`n x d`) into a `K(d+1) x n` design matrix.
pub fn design_matrix(features: &Matrix, params: &AntecedentParams) -> Result<FuzzyDesignMatrix> {
    let (n, d) = features.shape();
    check_dim(d, params)?;
    let rows = params.rules() * (d + 1);
    let mut data = Matrix::zeros(rows, n);
    let mut x = vec![0.0; d];
    for j in 0..n {
        for (p, v) in x.iter_mut().enumerate() {
            *v = features[(j, p)];
        }
        write_mapped(&x, params, data.column_mut(j).as_mut_slice());
    }
    Ok(FuzzyDesignMatrix {
        data,
        rules: params.rules(),
        dim: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(centers: &[f64], widths: &[f64], k: usize) -> AntecedentParams {
        let d = centers.len() / k;
        AntecedentParams::new(
            Matrix::from_row_slice(k, d, centers),
            Matrix::from_row_slice(k, d, widths),
        )
        .unwrap()
    }

    #[test]
    fn membership_values() {
        assert_eq!(membership(1.3, 1.3, 4.0).unwrap(), 1.0);
        // (x - c)^2 = 2 delta
        let v = membership(2.0, 0.0, 2.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
        assert!(membership(0.0, 0.0, 0.0).is_err());
        assert!(membership(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn membership_decreases_with_distance() {
        let mut prev = 1.0;
        for i in 1..50 {
            let v = membership(0.1 * i as f64, 0.0, 1.5).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn identical_rules_split_evenly() {
        let p = params(&[1.0, 2.0, 1.0, 2.0], &[3.0, 3.0, 3.0, 3.0], 2);
        let f = firing_levels(&[0.0, 5.0], &p).unwrap();
        assert_eq!(f.normalized, vec![0.5, 0.5]);
    }

    #[test]
    fn hand_evaluated_two_rule_firing() {
        let p = params(&[0.0, 2.0], &[1.0, 1.0], 2);
        let f = firing_levels(&[0.0], &p).unwrap();
        let e = (-2f64).exp();
        assert_eq!(f.raw[0], 1.0);
        assert!((f.raw[1] - e).abs() < 1e-15);
        assert!((f.normalized[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((f.normalized[1] - e / (1.0 + e)).abs() < 1e-15);
        assert!((f.normalized[0] - 0.8808).abs() < 1e-4);
        assert!((f.normalized[1] - 0.1192).abs() < 1e-4);
    }

    #[test]
    fn nearby_rule_dominates() {
        let p = params(&[0.0, 0.0, 50.0, 50.0], &[1.0; 4], 2);
        let f = firing_levels(&[0.0, 0.0], &p).unwrap();
        assert!(f.normalized[0] > f.normalized[1]);
        assert!(f.normalized[0] > 1.0 - 1e-12);
    }

    #[test]
    fn underflowing_products_still_normalize() {
        let d = 2000;
        let p = AntecedentParams::new(
            Matrix::from_fn(2, d, |k, _| k as f64),
            Matrix::from_element(2, d, 1.0),
        )
        .unwrap();
        let x = vec![3.0; d];
        let f = firing_levels(&x, &p).unwrap();
        assert!(f.raw.iter().all(|&r| r == 0.0));
        assert!((f.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(f.normalized[1] > f.normalized[0]);
    }

    #[test]
    fn single_rule_is_bias_plus_input() {
        let p = params(&[7.0], &[2.0], 1);
        assert_eq!(fuzzy_map(&[2.0], &p).unwrap().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn two_equal_rules_layout() {
        let p = params(&[0.0, 0.0], &[1.0, 1.0], 2);
        assert_eq!(
            fuzzy_map(&[2.0], &p).unwrap().as_slice(),
            &[0.5, 1.0, 0.5, 1.0]
        );
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = params(&[0.0, 0.0], &[1.0, 1.0], 1);
        assert!(fuzzy_map(&[1.0], &p).is_err());
        assert!(design_matrix(&Matrix::zeros(3, 3), &p).is_err());
    }

    #[test]
    fn design_matrix_columns_match_fuzzy_map() {
        let p = params(&[0.0, 1.0, 2.0, -1.0, 0.5, 0.5], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3);
        let x = Matrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, -1.0, 2.5, 3.0, -4.0, 0.2]);
        let g = design_matrix(&x, &p).unwrap();
        assert_eq!(g.data().shape(), (9, 4));
        for j in 0..4 {
            let xj: Vec<f64> = x.row(j).iter().copied().collect();
            assert_eq!(g.data().column(j), fuzzy_map(&xj, &p).unwrap());
            assert!((g.bias_sum(j) - 1.0).abs() < 1e-12);
        }

        // permuting rows permutes columns
        let perm = [2usize, 0, 3, 1];
        let xp = Matrix::from_fn(4, 2, |i, c| x[(perm[i], c)]);
        let gp = design_matrix(&xp, &p).unwrap();
        for (i, &src) in perm.iter().enumerate() {
            assert_eq!(gp.data().column(i), g.data().column(src));
        }
    }
}
