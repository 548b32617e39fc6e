//! Accuracy and explicit-mean MMD estimates.

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Fraction of positions where `predicted` equals `truth`.
pub fn evaluate<L: PartialEq>(predicted: &[L], truth: &[L]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::mismatch(format!(
            "{} predictions for {} ground-truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty prediction set"));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Squared mean distances between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct MmdEstimate {
    pub marginal: f64,
    pub conditional: f64,
}

fn mean_of(rows: &Matrix, idx: impl Iterator<Item = usize>) -> Option<Vector> {
    let mut sum = Vector::zeros(rows.ncols());
    let mut count = 0usize;
    for i in idx {
        sum += rows.row(i).transpose();
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Linear-kernel MMD between row samples `z_s` and `z_t`, computed from
/// explicit means.
///
/// `labels` carries source labels and target (pseudo-)labels; the conditional
/// part sums over classes present in both. Without labels it is 0.
pub fn empirical_mmd(
    z_s: &Matrix,
    z_t: &Matrix,
    labels: Option<(&[usize], &[usize])>,
) -> Result<MmdEstimate> {
    if z_s.ncols() != z_t.ncols() {
        return Err(Error::mismatch(format!(
            "samples have {} and {} columns",
            z_s.ncols(),
            z_t.ncols()
        )));
    }
    let (Some(ms), Some(mt)) = (mean_of(z_s, 0..z_s.nrows()), mean_of(z_t, 0..z_t.nrows())) else {
        return Err(Error::invalid("MMD needs non-empty samples"));
    };
    let marginal = (ms - mt).norm_squared();

    let mut conditional = 0.0;
    if let Some((ys, yt)) = labels {
        if ys.len() != z_s.nrows() || yt.len() != z_t.nrows() {
            return Err(Error::mismatch("label count must equal row count"));
        }
        let classes = ys.iter().chain(yt).copied().max().map_or(0, |m| m + 1);
        for c in 0..classes {
            let s = mean_of(z_s, (0..ys.len()).filter(|&i| ys[i] == c));
            let t = mean_of(z_t, (0..yt.len()).filter(|&i| yt[i] == c));
            if let (Some(s), Some(t)) = (s, t) {
                conditional += (s - t).norm_squared();
            }
        }
    }
    Ok(MmdEstimate {
        marginal,
        conditional,
    })
}
