//! Generalized symmetric-definite eigensolver for the consequent matrix.
//!
//! Solves `a p = phi b_reg p` for the `m` smallest `phi`, where
//! `b_reg = b + eps I`. The default route factors the positive definite `a`
//! (Cholesky), solves the reciprocal problem `b_reg q = psi a q` for the
//! largest `psi` as a standard symmetric eigenproblem, and maps back with
//! `phi = 1 / psi`. This never factors the possibly singular `b`. The second
//! route factors `b_reg` directly and is kept for cross-checking.

use nalgebra::linalg::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::objective::ObjectivePair;
use crate::Matrix;

/// Relative size of the ridge added to `b`.
pub const EPSILON_SCALE: f64 = 1e-9;

/// A returned eigenvector is flagged as regularization-dominated when less
/// than this share of its `b_reg`-norm comes from `b` itself.
const REGULARIZED_SHARE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Factor `a`, take the largest eigenvalues of the reciprocal pencil.
    #[default]
    FactorA,
    /// Factor `b_reg`, take the smallest eigenvalues directly.
    FactorB,
}

/// `m` smallest eigenpairs of the pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// `dim x m`, columns are `b_reg`-orthonormal eigenvectors.
    pub p: Matrix,
    /// Eigenvalues in non-decreasing order.
    pub phi: Vec<f64>,
    /// Ridge `eps` used to form `b_reg`.
    pub epsilon: f64,
    /// Per column: true when the eigenvector lies mostly in the null space of
    /// `b` and is determined by the ridge rather than the data.
    pub regularized: Vec<bool>,
}

/// `EPSILON_SCALE * trace(b) / dim`.
pub fn default_epsilon(b: &Matrix) -> f64 {
    EPSILON_SCALE * b.trace() / b.nrows() as f64
}

/// `b + eps I`.
pub fn regularize(b: &Matrix, epsilon: f64) -> Matrix {
    b + Matrix::identity(b.nrows(), b.ncols()) * epsilon
}

/// Smallest `m` eigenpairs of the objective pencil with the default ridge and
/// route.
pub fn generalized_eig_smallest(pair: &ObjectivePair, m: usize) -> Result<EigenSolution> {
    solve_pencil(&pair.a, &pair.b, m, default_epsilon(&pair.b), Route::FactorA)
}

/// Smallest `m` eigenpairs of `a p = phi (b + epsilon I) p`.
pub fn solve_pencil(a: &Matrix, b: &Matrix, m: usize, epsilon: f64, route: Route) -> Result<EigenSolution> {
    let dim = a.nrows();
    if a.shape() != (dim, dim) || b.shape() != (dim, dim) {
        return Err(Error::mismatch(format!(
            "pencil matrices must be square and equal in size, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if m < 1 || m > dim {
        return Err(Error::invalid(format!(
            "requested {m} eigenpairs, pencil dimension is {dim}"
        )));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::invalid(format!("ridge must be finite and >= 0, got {epsilon}")));
    }
    let b_reg = regularize(b, epsilon);

    let (mut p, phi) = match route {
        Route::FactorA => reciprocal_route(a, &b_reg, m)?,
        Route::FactorB => direct_route(a, &b_reg, m)?,
    };
    for mut col in p.column_iter_mut() {
        fix_sign(col.as_mut_slice());
    }

    let regularized = if epsilon > 0.0 {
        p.column_iter()
            .map(|col| (col.transpose() * b * col)[(0, 0)] < REGULARIZED_SHARE)
            .collect()
    } else {
        vec![false; m]
    };
    if regularized.iter().any(|&r| r) {
        log::debug!(
            "{} of {m} eigenvectors are determined by the ridge",
            regularized.iter().filter(|&&r| r).count()
        );
    }

    Ok(EigenSolution {
        p,
        phi,
        epsilon,
        regularized,
    })
}

fn cholesky(m: &Matrix, what: &str) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::NotPositiveDefinite {
        context: what.to_owned(),
        min_eigenvalue: SymmetricEigen::new(m.clone()).eigenvalues.min(),
    })
}

/// `L^{-1} s L^{-T}` for lower-triangular `L`, symmetrized.
fn congruence(l: &Matrix, s: &Matrix) -> Result<Matrix> {
    let x = l
        .solve_lower_triangular(s)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    Ok((&c + c.transpose()) * 0.5)
}

/// Indices of `values` sorted ascending (stable, so ties keep index order).
fn ascending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

fn reciprocal_route(a: &Matrix, b_reg: &Matrix, m: usize) -> Result<(Matrix, Vec<f64>)> {
    let l = cholesky(a, "numerator matrix a")?.unpack();
    let c = congruence(&l, b_reg)?;
    let eig = SymmetricEigen::new(c);
    let psi = eig.eigenvalues.as_slice();
    let mut order: Vec<usize> = (0..psi.len()).collect();
    order.sort_by(|&i, &j| psi[j].total_cmp(&psi[i]));

    let lt = l.transpose();
    let mut p = Matrix::zeros(a.nrows(), m);
    let mut phi = Vec::with_capacity(m);
    for (col, &k) in order.iter().take(m).enumerate() {
        let psi_k = psi[k];
        if psi_k.is_nan() || psi_k <= 0.0 {
            return Err(Error::Numerical(format!(
                "pencil has fewer than {m} finite eigenvalues (reciprocal eigenvalue {psi_k:e}); \
                 the denominator matrix is singular and no ridge was applied"
            )));
        }
        let q = lt
            .solve_upper_triangular(&eig.eigenvectors.column(k).into_owned())
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        // q^T a q = 1 and q^T b_reg q = psi
        p.set_column(col, &(q / psi_k.sqrt()));
        phi.push(1.0 / psi_k);
    }
    Ok((p, phi))
}

fn direct_route(a: &Matrix, b_reg: &Matrix, m: usize) -> Result<(Matrix, Vec<f64>)> {
    let l = cholesky(b_reg, "regularized denominator matrix b")?.unpack();
    let c = congruence(&l, a)?;
    let eig = SymmetricEigen::new(c);
    let order = ascending(eig.eigenvalues.as_slice());

    let lt = l.transpose();
    let mut p = Matrix::zeros(a.nrows(), m);
    let mut phi = Vec::with_capacity(m);
    for (col, &k) in order.iter().take(m).enumerate() {
        let q = lt
            .solve_upper_triangular(&eig.eigenvectors.column(k).into_owned())
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        p.set_column(col, &q);
        phi.push(eig.eigenvalues[k]);
    }
    Ok((p, phi))
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is
/// positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// `Tr(p^T a p) / Tr(p^T b_reg p)`.
pub fn trace_ratio(a: &Matrix, b_reg: &Matrix, p: &Matrix) -> Result<f64> {
    if a.nrows() != p.nrows() || b_reg.nrows() != p.nrows() {
        return Err(Error::mismatch(format!(
            "projection has {} rows, pencil dimension is {}",
            p.nrows(),
            a.nrows()
        )));
    }
    let num = (p.transpose() * a * p).trace();
    let den = (p.transpose() * b_reg * p).trace();
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Numerical(format!(
            "trace ratio denominator is {den}"
        )));
    }
    Ok(num / den)
}

/// Trace-ratio objective value of `p` under the pair's default ridge.
pub fn objective_value(pair: &ObjectivePair, p: &Matrix) -> Result<f64> {
    trace_ratio(&pair.a, &regularize(&pair.b, default_epsilon(&pair.b)), p)
}
