//! The adaptation loop, transformation into the learned fuzzy feature space,
//! baselines and evaluation.
//!
//! [`fit`] runs the full procedure:
//!
//! 1. fit Var-Part antecedents separately on the (standardized) source and
//!    target data and map both domains into design matrices `G_S`, `G_T`;
//! 2. seed target pseudo-labels with 1NN trained on the source features;
//! 3. for each iteration: build the conditional MMD matrices from the current
//!    pseudo-labels, assemble the pencil, solve for the consequent matrix `P`,
//!    project both domains and relabel the target with 1NN in the projected
//!    space.
//!
//! The marginal MMD matrix and the scatter terms depend only on the design
//! matrices and source labels, so they are built once before the loop.

pub mod knn;
pub mod metrics;
pub mod model;
pub mod pca;

use serde::{Deserialize, Serialize};

use crate::data::{fit_scalers, ClassIndex, Dataset, DomainPair, Scaler, StandardizeMode};
use crate::error::{Error, Result};
use crate::fuzzy::{design_matrix, FuzzyDesignMatrix};
use crate::objective::{
    assemble_objective, conditional_matrices, mmd_marginal_matrix, ScatterSet, Tradeoffs,
};
use crate::solver::{generalized_eig_smallest, objective_value};
use crate::varpart::{fit_antecedents, AntecedentParams};
use crate::Matrix;

pub use knn::knn1_predict;
pub use metrics::{empirical_mmd, evaluate, MmdEstimate};
pub use model::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use pca::{pca_project, Pca};

/// Default rule count.
pub const DEFAULT_RULES: usize = 3;
/// Default fuzzy feature space dimension.
pub const DEFAULT_DIM: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_LAMBDA: f64 = 0.01;
/// Default number of pseudo-label refinement iterations.
pub const DEFAULT_ITERATIONS: usize = 5;

/// Search grids for parameter sweeps.
pub const GRID_RULES: [usize; 8] = [3, 4, 5, 6, 7, 8, 9, 10];
pub const GRID_DIMS: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];
pub const GRID_TRADEOFFS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationConfig {
    /// Number of fuzzy rules K.
    pub rules: usize,
    /// Output dimension m of the learned feature space.
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    /// Number of pseudo-label refinement iterations T.
    pub iterations: usize,
    pub standardize: StandardizeMode,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self {
            rules: DEFAULT_RULES,
            dim: DEFAULT_DIM,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            lambda: DEFAULT_LAMBDA,
            iterations: DEFAULT_ITERATIONS,
            standardize: StandardizeMode::PerDomain,
        }
    }
}

impl AdaptationConfig {
    pub fn tradeoffs(&self) -> Tradeoffs {
        Tradeoffs {
            alpha: self.alpha,
            beta: self.beta,
            lambda: self.lambda,
        }
    }

    /// Fuzzy feature dimension `K(d+1)` for input dimension `d`.
    pub fn feature_dim(&self, d: usize) -> usize {
        self.rules * (d + 1)
    }

    /// Checks the configuration against input dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.rules < 1 {
            return Err(Error::invalid("rule count must satisfy K >= 1"));
        }
        if self.iterations < 1 {
            return Err(Error::invalid("iteration count must satisfy T >= 1"));
        }
        let max_dim = self.feature_dim(d);
        if self.dim < 1 || self.dim > max_dim {
            return Err(Error::invalid(format!(
                "output dimension must satisfy 1 <= m <= K(d+1) = {max_dim}, got m = {}",
                self.dim
            )));
        }
        self.tradeoffs().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Source,
    Target,
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(Domain::Source),
            "target" => Ok(Domain::Target),
            other => Err(Error::invalid(format!(
                "unknown domain `{other}` (expected source or target)"
            ))),
        }
    }
}

/// Diagnostics of one refinement iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Trace ratio of the solved projection.
    pub objective: f64,
    /// Smallest generalized eigenvalue.
    pub smallest_eigenvalue: f64,
    /// Marginal MMD of the projected data.
    pub marginal_mmd: f64,
    /// Conditional MMD of the projected data under the pseudo-labels used in
    /// this iteration.
    pub conditional_mmd: f64,
    /// Classes that contributed a conditional MMD term.
    pub matched_classes: usize,
    /// Target pseudo-labels changed by this iteration's relabelling.
    pub label_changes: usize,
    /// Output dimensions determined by the ridge rather than the data.
    pub regularized_components: usize,
}

/// Everything needed to map new data of either domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationModel {
    pub config: AdaptationConfig,
    pub classes: ClassIndex,
    pub source_scaler: Scaler,
    pub target_scaler: Scaler,
    pub source_antecedents: AntecedentParams,
    pub target_antecedents: AntecedentParams,
    /// Consequent matrix `P`, `K(d+1) x m`.
    pub consequents: Matrix,
    pub diagnostics: Vec<IterationRecord>,
}

impl AdaptationModel {
    /// Input dimension d.
    pub fn input_dim(&self) -> usize {
        self.source_antecedents.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.consequents.ncols()
    }

    fn parts(&self, domain: Domain) -> (&Scaler, &AntecedentParams) {
        match domain {
            Domain::Source => (&self.source_scaler, &self.source_antecedents),
            Domain::Target => (&self.target_scaler, &self.target_antecedents),
        }
    }

    /// Maps raw (unstandardized) feature rows into the learned space, `n x m`.
    pub fn transform_features(&self, features: &Matrix, domain: Domain) -> Result<Matrix> {
        if features.ncols() != self.input_dim() {
            return Err(Error::mismatch(format!(
                "model expects {} features, data has {}",
                self.input_dim(),
                features.ncols()
            )));
        }
        let (scaler, antecedents) = self.parts(domain);
        let g = design_matrix(&scaler.apply(features)?, antecedents)?;
        Ok(project(&g, &self.consequents))
    }
}

/// `(P^T G)^T`: one row per example.
fn project(g: &FuzzyDesignMatrix, p: &Matrix) -> Matrix {
    g.data().transpose() * p
}

/// Row `j` is `P^T g(x_j)` using the antecedents of `domain`.
pub fn transform(model: &AdaptationModel, dataset: &Dataset, domain: Domain) -> Result<Matrix> {
    model.transform_features(dataset.features(), domain)
}

/// Output of [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: AdaptationModel,
    /// Projected source data from the final iteration, `n_s x m`.
    pub source_embedding: Matrix,
    /// Projected target data from the final iteration, `n_t x m`.
    pub target_embedding: Matrix,
    /// Final target predictions as class indices of `model.classes`.
    pub target_predictions: Vec<usize>,
}

impl FitResult {
    pub fn target_labels(&self) -> Vec<String> {
        self.model.classes.decode(&self.target_predictions)
    }
}

fn count_changes(old: &[usize], new: &[usize]) -> usize {
    old.iter().zip(new).filter(|(a, b)| a != b).count()
}

/// Learns antecedents for both domains and the shared consequent matrix.
///
/// Any labels attached to the target are ignored.
pub fn fit(pair: &DomainPair, config: &AdaptationConfig) -> Result<FitResult> {
    let d = pair.d();
    config.validate(d)?;
    let source_labels = pair
        .source()
        .labels()
        .ok_or_else(|| Error::invalid("source dataset must be labeled"))?;
    let classes = ClassIndex::from_labels(source_labels);
    let ys = classes.encode(source_labels)?;
    let (n_s, n_t) = (pair.source().n(), pair.target().n());
    for (name, n) in [("source", n_s), ("target", n_t)] {
        if n < config.rules.max(2) {
            return Err(Error::invalid(format!(
                "{name} domain has {n} examples; need at least max(K, 2) = {}",
                config.rules.max(2)
            )));
        }
    }

    let (source_scaler, target_scaler) = fit_scalers(pair, config.standardize);
    let xs = source_scaler.apply(pair.source().features())?;
    let xt = target_scaler.apply(pair.target().features())?;

    let source_antecedents = fit_antecedents(&xs, config.rules)?;
    let target_antecedents = fit_antecedents(&xt, config.rules)?;
    let g_s = design_matrix(&xs, &source_antecedents)?;
    let g_t = design_matrix(&xt, &target_antecedents)?;
    let g_x = g_s.hconcat(&g_t)?;

    let marginal = mmd_marginal_matrix(n_s, n_t)?;
    let scatter = ScatterSet::compute(&g_s, &ys, &g_t)?;

    let mut pseudo = knn1_predict(&xs, &ys, &xt)?;
    let mut diagnostics = Vec::with_capacity(config.iterations);
    let mut last = None;

    for iteration in 1..=config.iterations {
        let mut mmds = vec![marginal.clone()];
        let conditional = conditional_matrices(&ys, &pseudo, classes.len());
        let matched = conditional.len();
        if matched < classes.len() {
            log::info!(
                "iteration {iteration}: {} of {} classes absent from target pseudo-labels",
                classes.len() - matched,
                classes.len()
            );
        }
        mmds.extend(conditional);

        let pencil = assemble_objective(&g_x, &mmds, &scatter, config.tradeoffs())?;
        let solution = generalized_eig_smallest(&pencil, config.dim)?;
        let z_s = project(&g_s, &solution.p);
        let z_t = project(&g_t, &solution.p);
        let mmd = empirical_mmd(&z_s, &z_t, Some((&ys, &pseudo)))?;
        let updated = knn1_predict(&z_s, &ys, &z_t)?;

        diagnostics.push(IterationRecord {
            iteration,
            objective: objective_value(&pencil, &solution.p)?,
            smallest_eigenvalue: solution.phi[0],
            marginal_mmd: mmd.marginal,
            conditional_mmd: mmd.conditional,
            matched_classes: matched,
            label_changes: count_changes(&pseudo, &updated),
            regularized_components: solution.regularized.iter().filter(|&&r| r).count(),
        });
        pseudo = updated;
        last = Some((solution.p, z_s, z_t));
    }

    let (consequents, source_embedding, target_embedding) =
        last.expect("at least one iteration runs");
    Ok(FitResult {
        model: AdaptationModel {
            config: *config,
            classes,
            source_scaler,
            target_scaler,
            source_antecedents,
            target_antecedents,
            consequents,
            diagnostics,
        },
        source_embedding,
        target_embedding,
        target_predictions: pseudo,
    })
}

/// 1NN trained on the standardized source features, applied to the
/// standardized target features.
pub fn baseline_knn_raw(pair: &DomainPair, mode: StandardizeMode) -> Result<Vec<String>> {
    let (src, tgt) = fit_scalers(pair, mode);
    let labels = pair
        .source()
        .labels()
        .ok_or_else(|| Error::invalid("source dataset must be labeled"))?;
    knn1_predict(
        &src.apply(pair.source().features())?,
        labels,
        &tgt.apply(pair.target().features())?,
    )
}

/// 1NN after projecting both standardized domains onto the leading `m`
/// principal directions of their concatenation. `m` is capped at
/// `min(n_s + n_t, d)`.
pub fn baseline_knn_pca(pair: &DomainPair, mode: StandardizeMode, m: usize) -> Result<Vec<String>> {
    let (src, tgt) = fit_scalers(pair, mode);
    let xs = src.apply(pair.source().features())?;
    let xt = tgt.apply(pair.target().features())?;
    let labels = pair
        .source()
        .labels()
        .ok_or_else(|| Error::invalid("source dataset must be labeled"))?;
    let mut stacked = Matrix::zeros(xs.nrows() + xt.nrows(), xs.ncols());
    stacked.rows_mut(0, xs.nrows()).copy_from(&xs);
    stacked.rows_mut(xs.nrows(), xt.nrows()).copy_from(&xt);
    let m = m.min(stacked.nrows().min(stacked.ncols()));
    let pca = Pca::fit(&stacked, m)?;
    knn1_predict(&pca.transform(&xs)?, labels, &pca.transform(&xt)?)
}
