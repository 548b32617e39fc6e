//! Ingredients of the consequent-learning objective and their assembly into
//! the matrix pencil `(a, b)`:
//!
//! ```text
//! a = G_X (M + sum_c M_c) G_X^T + alpha I + beta S_w
//! b = lambda G_T H_T G_T^T + beta S_b
//! ```
//!
//! `G_X = [G_S, G_T]` stacks source columns before target columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::FuzzyDesignMatrix;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmdKind {
    Marginal,
    /// Conditional term of one class index.
    Conditional(usize),
}

/// MMD coefficient matrix over the `n_s + n_t` stacked examples.
///
/// Every such matrix is the outer product `v v^T` of a signed weight vector
/// (`1/n_s` on source members, `-1/n_t` on target members, 0 elsewhere), so
/// only `v` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdMatrix {
    weights: Vector,
    kind: MmdKind,
}

impl MmdMatrix {
    pub fn kind(&self) -> MmdKind {
        self.kind
    }

    /// Generating vector `v` of `M = v v^T`.
    pub fn weights(&self) -> &Vector {
        &self.weights
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    /// Dense `(n_s + n_t)` square matrix.
    pub fn to_dense(&self) -> Matrix {
        &self.weights * self.weights.transpose()
    }

    /// `G M G^T`, computed as `(G v)(G v)^T`.
    pub fn sandwich(&self, g: &Matrix) -> Result<Matrix> {
        if g.ncols() != self.size() {
            return Err(Error::mismatch(format!(
                "design matrix has {} columns, MMD matrix covers {}",
                g.ncols(),
                self.size()
            )));
        }
        let gv = g * &self.weights;
        Ok(&gv * gv.transpose())
    }
}

/// Marginal MMD matrix: `1/n_s^2` on source pairs, `1/n_t^2` on target pairs,
/// `-1/(n_s n_t)` across domains.
pub fn mmd_marginal_matrix(n_s: usize, n_t: usize) -> Result<MmdMatrix> {
    if n_s == 0 || n_t == 0 {
        return Err(Error::invalid(format!(
            "domain sizes must be positive, got n_s={n_s}, n_t={n_t}"
        )));
    }
    let (ws, wt) = (1.0 / n_s as f64, -1.0 / n_t as f64);
    let weights = Vector::from_fn(n_s + n_t, |i, _| if i < n_s { ws } else { wt });
    Ok(MmdMatrix {
        weights,
        kind: MmdKind::Marginal,
    })
}

/// Conditional MMD matrix of class `class`, or `None` when the class is
/// missing from either the source labels or the target pseudo-labels.
///
/// The cross-domain entries are `-1/(n_s^c n_t^c)`; this sign is what makes
/// `Tr(P^T G M_c G^T P)` equal the squared distance between projected class
/// means.
pub fn mmd_conditional_matrix(
    source_labels: &[usize],
    target_pseudo: &[usize],
    class: usize,
) -> Option<MmdMatrix> {
    let ns_c = source_labels.iter().filter(|&&y| y == class).count();
    let nt_c = target_pseudo.iter().filter(|&&y| y == class).count();
    if ns_c == 0 || nt_c == 0 {
        return None;
    }
    let (ws, wt) = (1.0 / ns_c as f64, -1.0 / nt_c as f64);
    let weights = Vector::from_iterator(
        source_labels.len() + target_pseudo.len(),
        source_labels
            .iter()
            .map(|&y| if y == class { ws } else { 0.0 })
            .chain(target_pseudo.iter().map(|&y| if y == class { wt } else { 0.0 })),
    );
    Some(MmdMatrix {
        weights,
        kind: MmdKind::Conditional(class),
    })
}

/// Conditional matrices for every class in `0..classes` present in both
/// domains, in class order.
pub fn conditional_matrices(
    source_labels: &[usize],
    target_pseudo: &[usize],
    classes: usize,
) -> Vec<MmdMatrix> {
    (0..classes)
        .filter_map(|c| mmd_conditional_matrix(source_labels, target_pseudo, c))
        .collect()
}

/// `I_n - (1/n) 1 1^T`.
pub fn centering_matrix(n: usize) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::invalid("centering matrix needs n >= 1"));
    }
    let inv = 1.0 / n as f64;
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 - inv
        } else {
            -inv
        }
    }))
}

/// `G H G^T` for the centering matrix `H` of `G`'s column count, without
/// forming `H`.
pub fn centered_gram(g: &Matrix) -> Matrix {
    let n = g.ncols() as f64;
    let mean = g.column_sum() / n;
    let mut centered = g.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    &centered * centered.transpose()
}

fn check_labels(g: &FuzzyDesignMatrix, labels: &[usize]) -> Result<()> {
    if labels.len() != g.n() {
        return Err(Error::mismatch(format!(
            "{} labels for {} design matrix columns",
            labels.len(),
            g.n()
        )));
    }
    Ok(())
}

fn class_members(labels: &[usize]) -> Vec<Vec<usize>> {
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }
    members
}

fn columns_of(g: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(g.nrows(), idx.len(), |r, c| g[(r, idx[c])])
}

/// Between-class scatter of the source design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BetweenScatter {
    pub matrix: Matrix,
    /// Set when fewer than two classes were present; `matrix` is then zero.
    pub single_class: bool,
}

/// `sum_c n_c (m_c - m)(m_c - m)^T` over the columns of `g_s`.
pub fn between_scatter(g_s: &FuzzyDesignMatrix, labels: &[usize]) -> Result<BetweenScatter> {
    check_labels(g_s, labels)?;
    let g = g_s.data();
    let dim = g.nrows();
    let members = class_members(labels);
    let present: Vec<&Vec<usize>> = members.iter().filter(|m| !m.is_empty()).collect();
    if present.len() < 2 {
        log::warn!("between-class scatter: fewer than two classes present");
        return Ok(BetweenScatter {
            matrix: Matrix::zeros(dim, dim),
            single_class: true,
        });
    }
    let grand = g.column_sum() / g.ncols() as f64;
    let mut sb = Matrix::zeros(dim, dim);
    for idx in present {
        let mean = columns_of(g, idx).column_sum() / idx.len() as f64;
        let diff = mean - &grand;
        sb += idx.len() as f64 * &diff * diff.transpose();
    }
    Ok(BetweenScatter {
        matrix: sb,
        single_class: false,
    })
}

/// `sum_c G_c H_c G_c^T`, the within-class scatter of `g_s`.
pub fn within_scatter(g_s: &FuzzyDesignMatrix, labels: &[usize]) -> Result<Matrix> {
    check_labels(g_s, labels)?;
    let g = g_s.data();
    let dim = g.nrows();
    let mut sw = Matrix::zeros(dim, dim);
    for idx in class_members(labels).iter().filter(|m| !m.is_empty()) {
        sw += centered_gram(&columns_of(g, idx));
    }
    Ok(sw)
}

/// Scatter terms needed by [`assemble_objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSet {
    pub s_b: Matrix,
    pub s_w: Matrix,
    /// Target covariance term `G_T H_T G_T^T`.
    pub target_variance: Matrix,
}

impl ScatterSet {
    pub fn compute(g_s: &FuzzyDesignMatrix, labels: &[usize], g_t: &FuzzyDesignMatrix) -> Result<Self> {
        if g_s.feature_dim() != g_t.feature_dim() {
            return Err(Error::mismatch("source and target design matrices differ in row count"));
        }
        Ok(Self {
            s_b: between_scatter(g_s, labels)?.matrix,
            s_w: within_scatter(g_s, labels)?,
            target_variance: centered_gram(g_t.data()),
        })
    }
}

/// Trade-off weights of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tradeoffs {
    /// Weight of the `Tr(P^T P)` regularizer; must be positive.
    pub alpha: f64,
    /// Weight of the within/between class scatter terms.
    pub beta: f64,
    /// Weight of the target variance term.
    pub lambda: f64,
}

impl Tradeoffs {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid(format!(
                "alpha must satisfy alpha > 0, got {}",
                self.alpha
            )));
        }
        for (name, v) in [("beta", self.beta), ("lambda", self.lambda)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must satisfy {name} >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Numerator matrix `a` and denominator matrix `b` of the trace ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectivePair {
    pub a: Matrix,
    pub b: Matrix,
    pub weights: Tradeoffs,
}

impl ObjectivePair {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Builds `(a, b)` from the stacked design matrix `g_x = [G_S, G_T]`, the MMD
/// matrices (marginal and whichever conditional ones are available) and the
/// scatter terms. Both outputs are explicitly symmetrized.
pub fn assemble_objective(
    g_x: &FuzzyDesignMatrix,
    mmds: &[MmdMatrix],
    scatter: &ScatterSet,
    weights: Tradeoffs,
) -> Result<ObjectivePair> {
    let dim = g_x.feature_dim();
    let shapes = [
        scatter.s_b.shape(),
        scatter.s_w.shape(),
        scatter.target_variance.shape(),
    ];
    if shapes.iter().any(|&s| s != (dim, dim)) {
        return Err(Error::mismatch(format!(
            "scatter matrices must be {dim}x{dim}"
        )));
    }
    let mut a = Matrix::identity(dim, dim) * weights.alpha;
    for m in mmds {
        a += m.sandwich(g_x.data())?;
    }
    a += &scatter.s_w * weights.beta;
    let b = &scatter.target_variance * weights.lambda + &scatter.s_b * weights.beta;
    Ok(ObjectivePair {
        a: symmetrize(&a),
        b: symmetrize(&b),
        weights,
    })
}
