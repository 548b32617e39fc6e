//! Versioned JSON model file.
//!
//! Matrices are stored row-major as `{"rows", "cols", "data"}`. Floats are
//! written in shortest round-trip form, so save/load is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdaptationConfig, AdaptationModel, IterationRecord};
use crate::data::{ClassIndex, Scaler};
use crate::error::{Error, Result};
use crate::varpart::AntecedentParams;
use crate::Matrix;

pub const MODEL_FORMAT: &str = "fuzzy-transfer-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Matrix> for MatrixRecord {
    fn from(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().as_slice().to_vec(),
        }
    }
}

impl TryFrom<MatrixRecord> for Matrix {
    type Error = Error;

    fn try_from(r: MatrixRecord) -> Result<Matrix> {
        if r.rows * r.cols != r.data.len() {
            return Err(Error::Model(format!(
                "matrix record declares {}x{} but holds {} values",
                r.rows,
                r.cols,
                r.data.len()
            )));
        }
        Ok(Matrix::from_row_slice(r.rows, r.cols, &r.data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AntecedentRecord {
    centers: MatrixRecord,
    widths: MatrixRecord,
}

impl From<&AntecedentParams> for AntecedentRecord {
    fn from(p: &AntecedentParams) -> Self {
        Self {
            centers: p.centers().into(),
            widths: p.widths().into(),
        }
    }
}

impl TryFrom<AntecedentRecord> for AntecedentParams {
    type Error = Error;

    fn try_from(r: AntecedentRecord) -> Result<Self> {
        AntecedentParams::new(r.centers.try_into()?, r.widths.try_into()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: AdaptationConfig,
    classes: ClassIndex,
    source_scaler: Scaler,
    target_scaler: Scaler,
    source_antecedents: AntecedentRecord,
    target_antecedents: AntecedentRecord,
    consequents: MatrixRecord,
    diagnostics: Vec<IterationRecord>,
}

impl AdaptationModel {
    /// Serializes the model as pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            config: self.config,
            classes: self.classes.clone(),
            source_scaler: self.source_scaler.clone(),
            target_scaler: self.target_scaler.clone(),
            source_antecedents: (&self.source_antecedents).into(),
            target_antecedents: (&self.target_antecedents).into(),
            consequents: (&self.consequents).into(),
            diagnostics: self.diagnostics.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unknown format `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                file.version
            )));
        }
        let source_antecedents: AntecedentParams = file.source_antecedents.try_into()?;
        let target_antecedents: AntecedentParams = file.target_antecedents.try_into()?;
        let consequents: Matrix = file.consequents.try_into()?;
        let d = source_antecedents.dim();
        let k = source_antecedents.rules();
        if target_antecedents.dim() != d
            || target_antecedents.rules() != k
            || consequents.nrows() != k * (d + 1)
            || file.source_scaler.dim() != d
            || file.target_scaler.dim() != d
        {
            return Err(Error::Model("inconsistent component shapes".into()));
        }
        Ok(Self {
            config: file.config,
            classes: file.classes,
            source_scaler: file.source_scaler,
            target_scaler: file.target_scaler,
            source_antecedents,
            target_antecedents,
            consequents,
            diagnostics: file.diagnostics,
        })
    }
}

pub fn save_model(model: &AdaptationModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_json()?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AdaptationModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    AdaptationModel::from_json(&text)
}
