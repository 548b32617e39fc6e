use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{AdaptationConfig, IterationRecord};

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timings(pub BTreeMap<String, f64>);

impl Timings {
    pub fn record(&mut self, stage: &str, start: Instant) {
        self.0
            .insert(stage.to_owned(), start.elapsed().as_secs_f64() * 1e3);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// 1NN on standardized input features.
    pub knn_raw: f64,
    /// 1NN on principal components of the standardized features.
    pub knn_pca: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub config: AdaptationConfig,
    pub target_accuracy: Option<f64>,
    pub final_objective: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    /// `target-accuracy` when ground truth was given, `objective` otherwise.
    pub selection: String,
    pub evaluated: usize,
    pub best: AdaptationConfig,
    /// One entry per configuration in canonical grid order.
    pub results: Vec<GridEntry>,
}

/// Machine-readable record of a `fit` or `bench` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: AdaptationConfig,
    pub n_source: usize,
    pub n_target: usize,
    pub input_dim: usize,
    pub classes: Vec<String>,
    pub iterations: Vec<IterationRecord>,
    pub target_accuracy: Option<f64>,
    pub baselines: Option<Baselines>,
    /// Marginal MMD between the standardized input domains.
    pub raw_marginal_mmd: f64,
    pub grid: Option<GridSummary>,
    pub timings_ms: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Model(e.to_string()))
    }

    /// The report with wall-clock timings cleared; identical across reruns.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings_ms: Timings::default(),
            ..self.clone()
        }
    }

    pub fn summary_line(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_owned(), |a| format!("{:.4}", a));
        format!(
            "K={} m={} alpha={} beta={} lambda={} T={} target_accuracy={} knn_raw={} knn_pca={}",
            self.config.rules,
            self.config.dim,
            self.config.alpha,
            self.config.beta,
            self.config.lambda,
            self.config.iterations,
            fmt(self.target_accuracy),
            fmt(self.baselines.as_ref().map(|b| b.knn_raw)),
            fmt(self.baselines.as_ref().map(|b| b.knn_pca)),
        )
    }
}
