//! Rule antecedents: deterministic Var-Part clustering for the centers and
//! squared-deviation kernel widths rescaled to `[1, 10]`.

use crate::error::{Error, Result};
use crate::Matrix;

/// Lower and upper end of the rescaled kernel width range.
pub const WIDTH_MIN: f64 = 1.0;
pub const WIDTH_MAX: f64 = 10.0;

/// Rule centers and Gaussian widths of one domain's fuzzy system, both `K x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntecedentParams {
    centers: Matrix,
    widths: Matrix,
}

impl AntecedentParams {
    pub fn new(centers: Matrix, widths: Matrix) -> Result<Self> {
        if centers.shape() != widths.shape() {
            return Err(Error::mismatch(format!(
                "centers {:?} and widths {:?} differ in shape",
                centers.shape(),
                widths.shape()
            )));
        }
        if centers.nrows() == 0 || centers.ncols() == 0 {
            return Err(Error::invalid("antecedents need at least one rule and one dimension"));
        }
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("rule centers must be finite"));
        }
        if widths.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("kernel widths must be finite and strictly positive"));
        }
        Ok(Self { centers, widths })
    }

    pub fn centers(&self) -> &Matrix {
        &self.centers
    }

    pub fn widths(&self) -> &Matrix {
        &self.widths
    }

    /// Number of rules K.
    pub fn rules(&self) -> usize {
        self.centers.nrows()
    }

    /// Input dimension d.
    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }
}

/// Result of [`var_part`].
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// `K x d` cluster means.
    pub centers: Matrix,
    /// Cluster index of every input row.
    pub assignment: Vec<usize>,
}

impl Partition {
    /// Total within-cluster sum of squared errors.
    pub fn sse(&self, features: &Matrix) -> f64 {
        features
            .row_iter()
            .zip(&self.assignment)
            .map(|(row, &k)| (row - self.centers.row(k)).norm_squared())
            .sum()
    }
}

/// Divisive clustering into exactly `k` clusters.
///
/// Starting from one cluster holding every row, the cluster with the largest
/// within-cluster SSE is split at the mean of its highest-variance dimension
/// (`x <= mean` goes to the first child) until `k` clusters exist. The first
/// child keeps the parent's index, the second is appended. Ties on SSE or
/// variance go to the lowest index.
///
/// If a split leaves one side empty (all members equal in that dimension) the
/// members are split in half by input order instead.
pub fn var_part(features: &Matrix, k: usize) -> Result<Partition> {
    let n = features.nrows();
    if k < 1 {
        return Err(Error::invalid("number of clusters must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "number of clusters {k} exceeds number of examples {n}"
        )));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features must be finite"));
    }

    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut sse: Vec<f64> = vec![cluster_sse(features, &clusters[0])];

    while clusters.len() < k {
        // k <= n guarantees some cluster still has two members.
        let j = (0..clusters.len())
            .filter(|&j| clusters[j].len() > 1)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if sse[b] >= sse[j] => Some(b),
                _ => Some(j),
            })
            .expect("a splittable cluster exists while clusters < k <= n");

        let (first, second) = split(features, &clusters[j]);
        sse[j] = cluster_sse(features, &first);
        clusters[j] = first;
        sse.push(cluster_sse(features, &second));
        clusters.push(second);
    }

    let d = features.ncols();
    let mut centers = Matrix::zeros(k, d);
    let mut assignment = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        let mean = cluster_mean(features, members);
        centers.row_mut(c).copy_from_slice(&mean);
        for &i in members {
            assignment[i] = c;
        }
    }
    Ok(Partition {
        centers,
        assignment,
    })
}

fn cluster_mean(features: &Matrix, members: &[usize]) -> Vec<f64> {
    let inv = 1.0 / members.len() as f64;
    (0..features.ncols())
        .map(|p| members.iter().map(|&i| features[(i, p)]).sum::<f64>() * inv)
        .collect()
}

fn cluster_sse(features: &Matrix, members: &[usize]) -> f64 {
    let mean = cluster_mean(features, members);
    members
        .iter()
        .map(|&i| {
            mean.iter()
                .enumerate()
                .map(|(p, m)| (features[(i, p)] - m).powi(2))
                .sum::<f64>()
        })
        .sum()
}

fn split(features: &Matrix, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mean = cluster_mean(features, members);
    let inv = 1.0 / members.len() as f64;
    let mut best_dim = 0;
    let mut best_var = f64::NEG_INFINITY;
    for (p, mu) in mean.iter().enumerate() {
        let var = members
            .iter()
            .map(|&i| (features[(i, p)] - mu).powi(2))
            .sum::<f64>()
            * inv;
        if var > best_var {
            best_var = var;
            best_dim = p;
        }
    }
    let threshold = mean[best_dim];
    let (first, second): (Vec<usize>, Vec<usize>) = members
        .iter()
        .partition(|&&i| features[(i, best_dim)] <= threshold);
    if first.is_empty() || second.is_empty() {
        let half = members.len().div_ceil(2);
        return (members[..half].to_vec(), members[half..].to_vec());
    }
    (first, second)
}

/// Kernel widths for every rule and dimension.
///
/// The raw width of rule `k` in dimension `p` is the sum over all rows of
/// `(x_p - c_kp)^2`. Each dimension's K raw widths are then mapped affinely so
/// the smallest becomes 1 and the largest 10; a dimension whose raw widths are
/// all equal maps to 5.5.
pub fn kernel_widths(features: &Matrix, centers: &Matrix) -> Result<Matrix> {
    if features.ncols() != centers.ncols() {
        return Err(Error::mismatch(format!(
            "features have {} columns, centers {}",
            features.ncols(),
            centers.ncols()
        )));
    }
    if features.nrows() < 2 {
        return Err(Error::invalid("kernel widths need at least 2 examples"));
    }
    let (k, d) = centers.shape();
    let mut widths = Matrix::zeros(k, d);
    for p in 0..d {
        let col = features.column(p);
        for r in 0..k {
            let c = centers[(r, p)];
            widths[(r, p)] = col.iter().map(|x| (x - c).powi(2)).sum();
        }
    }
    for p in 0..d {
        let mut col = widths.column_mut(p);
        let lo = col.min();
        let hi = col.max();
        let range = hi - lo;
        if range <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
            col.fill(0.5 * (WIDTH_MIN + WIDTH_MAX));
        } else {
            for w in col.iter_mut() {
                let t = (*w - lo) / range;
                *w = (WIDTH_MIN + (WIDTH_MAX - WIDTH_MIN) * t).clamp(WIDTH_MIN, WIDTH_MAX);
            }
        }
    }
    Ok(widths)
}

/// Var-Part centers plus rescaled widths for one domain.
pub fn fit_antecedents(features: &Matrix, rules: usize) -> Result<AntecedentParams> {
    let partition = var_part(features, rules)?;
    let widths = kernel_widths(features, &partition.centers)?;
    AntecedentParams::new(partition.centers, widths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(values: &[f64]) -> Matrix {
        Matrix::from_column_slice(values.len(), 1, values)
    }

    #[test]
    fn splits_at_mean_in_one_dimension() {
        let part = var_part(&col(&[0.0, 1.0, 9.0, 10.0]), 2).unwrap();
        assert_eq!(part.assignment, vec![0, 0, 1, 1]);
        assert_eq!(part.centers[(0, 0)], 0.5);
        assert_eq!(part.centers[(1, 0)], 9.5);
    }

    #[test]
    fn single_cluster_is_global_mean() {
        let x = Matrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0, 8.0]);
        let part = var_part(&x, 1).unwrap();
        assert_eq!(part.assignment, vec![0, 0, 0]);
        assert_eq!(part.centers[(0, 0)], 2.0);
        assert_eq!(part.centers[(0, 1)], 4.0);
    }

    #[test]
    fn rejects_bad_cluster_counts() {
        let x = col(&[1.0, 2.0]);
        assert!(var_part(&x, 0).is_err());
        assert!(var_part(&x, 3).is_err());
    }

    #[test]
    fn splits_highest_variance_dimension() {
        // dim 1 has the larger spread, so the split happens there.
        let x = Matrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 10.0, 0.0, 11.0, 1.0, 1.0]);
        let part = var_part(&x, 2).unwrap();
        assert_eq!(part.assignment, vec![0, 1, 1, 0]);
    }

    #[test]
    fn duplicate_points_fall_back_to_halving() {
        let x = col(&[3.0, 3.0, 3.0, 3.0]);
        let part = var_part(&x, 3).unwrap();
        let mut sizes = [0; 3];
        for &a in &part.assignment {
            sizes[a] += 1;
        }
        assert!(sizes.iter().all(|&s| s > 0));
        assert!(part.centers.iter().all(|&c| c == 3.0));
    }

    #[test]
    fn deterministic_on_random_data() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = Matrix::from_fn(40, 3, |_, _| rng.random_range(-1.0..1.0));
        let a = var_part(&x, 4).unwrap();
        let b = var_part(&x, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn width_of_single_rule_is_midpoint() {
        // raw width (0-1)^2 + (2-1)^2 = 2, one rule -> 5.5
        let w = kernel_widths(&col(&[0.0, 2.0]), &col(&[1.0])).unwrap();
        assert_eq!(w[(0, 0)], 5.5);
    }

    #[test]
    fn widths_map_min_to_one_and_max_to_ten() {
        // x = {1, -1}: c = 0 gives raw 2, c = sqrt(3) gives 2 + 2c^2 = 8
        let x = col(&[1.0, -1.0]);
        let c = col(&[0.0, 3f64.sqrt()]);
        let w = kernel_widths(&x, &c).unwrap();
        assert_eq!(w[(0, 0)], 1.0);
        assert!((w[(1, 0)] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn widths_need_two_examples() {
        assert!(kernel_widths(&col(&[1.0]), &col(&[1.0])).is_err());
    }

    proptest! {
        #[test]
        fn partition_is_complete_and_widths_in_range(
            seed in 0u64..1000, n in 2usize..30, d in 1usize..5, k in 1usize..6,
        ) {
            use rand::{Rng, SeedableRng};
            prop_assume!(k <= n);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Matrix::from_fn(n, d, |_, _| rng.random_range(-5.0..5.0));
            let part = var_part(&x, k).unwrap();
            prop_assert_eq!(part.assignment.len(), n);
            let mut sizes = vec![0; k];
            for &a in &part.assignment { sizes[a] += 1; }
            prop_assert!(sizes.iter().all(|&s| s > 0));

            let w = kernel_widths(&x, &part.centers).unwrap();
            prop_assert!(w.iter().all(|&v| (WIDTH_MIN..=WIDTH_MAX).contains(&v)));
        }

        #[test]
        fn sse_does_not_increase_with_more_clusters(
            seed in 0u64..1000, n in 3usize..30, d in 1usize..4,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Matrix::from_fn(n, d, |_, _| rng.random_range(-5.0..5.0));
            let mut prev = f64::INFINITY;
            for k in 1..=n.min(8) {
                let sse = var_part(&x, k).unwrap().sse(&x);
                prop_assert!(sse <= prev + 1e-9 * prev.abs().max(1.0));
                prev = sse;
            }
        }
    }
}
