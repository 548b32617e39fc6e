//! Datasets, CSV ingestion, standardization and a synthetic domain-shift
//! generator.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

/// Feature matrix (rows are examples) with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    feature_names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset with generated feature names `f1..fd`.
    pub fn new(features: Matrix, labels: Option<Vec<String>>) -> Result<Self> {
        let names = (1..=features.ncols()).map(|j| format!("f{j}")).collect();
        Self::with_names(features, names, labels)
    }

    pub fn with_names(
        features: Matrix,
        feature_names: Vec<String>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, d) = features.shape();
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!(
                "dataset must have at least one row and one feature column, got {n}x{d}"
            )));
        }
        if feature_names.len() != d {
            return Err(Error::mismatch(format!(
                "{} feature names for {d} columns",
                feature_names.len()
            )));
        }
        if let Some((i, j)) = first_non_finite(&features) {
            return Err(Error::invalid(format!(
                "non-finite feature value at row {}, column {}",
                i + 1,
                j + 1
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::mismatch(format!(
                    "{} labels for {n} examples",
                    labels.len()
                )));
            }
        }
        Ok(Self {
            features,
            feature_names,
            labels,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Copy of this dataset with labels removed.
    pub fn without_labels(&self) -> Dataset {
        Dataset {
            features: self.features.clone(),
            feature_names: self.feature_names.clone(),
            labels: None,
        }
    }

    /// Copy of this dataset with the feature matrix replaced (same shape).
    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        if features.shape() != self.features.shape() {
            return Err(Error::mismatch("replacement features must keep the shape"));
        }
        Dataset::with_names(features, self.feature_names.clone(), self.labels.clone())
    }
}

fn first_non_finite(m: &Matrix) -> Option<(usize, usize)> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Labeled source domain paired with an unlabeled target domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPair {
    source: Dataset,
    target: Dataset,
}

impl DomainPair {
    /// Pairs two datasets. Any labels on the target are dropped so that they can
    /// never leak into training.
    pub fn new(source: Dataset, target: Dataset) -> Result<Self> {
        if source.d() != target.d() {
            return Err(Error::mismatch(format!(
                "source has {} features, target has {}",
                source.d(),
                target.d()
            )));
        }
        let labels = source
            .labels()
            .ok_or_else(|| Error::invalid("source dataset must be labeled"))?;
        let classes = ClassIndex::from_labels(labels);
        if classes.len() < 2 {
            return Err(Error::invalid(format!(
                "source must contain at least 2 classes, found {}",
                classes.len()
            )));
        }
        let target = if target.labels().is_some() {
            target.without_labels()
        } else {
            target
        };
        Ok(Self { source, target })
    }

    pub fn source(&self) -> &Dataset {
        &self.source
    }

    pub fn target(&self) -> &Dataset {
        &self.target
    }

    pub fn d(&self) -> usize {
        self.source.d()
    }
}

/// Maps opaque label strings to dense indices `0..C` by first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassIndex {
    names: Vec<String>,
}

impl ClassIndex {
    pub fn from_labels(labels: &[String]) -> Self {
        let mut names: Vec<String> = Vec::new();
        for label in labels {
            if !names.contains(label) {
                names.push(label.clone());
            }
        }
        Self { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.names.iter().position(|n| n == label)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// Encodes labels; fails on a label outside the class set.
    pub fn encode(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l)
                    .ok_or_else(|| Error::invalid(format!("label `{l}` is not a known class")))
            })
            .collect()
    }

    pub fn decode(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&i| self.names[i].clone()).collect()
    }
}

// ---------------------------------------------------------------------------
// CSV input and output

/// Reads a comma-separated table with a header row.
///
/// When `label_column` is given, that column is taken verbatim as the label
/// and every other column must be numeric.
pub fn load_dataset(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, 0, e))?
        .iter()
        .map(str::to_owned)
        .collect();

    let label_idx = match label_column {
        Some(name) => Some(header.iter().position(|h| h == name).ok_or_else(|| {
            Error::MissingLabelColumn {
                path: path.to_path_buf(),
                column: name.to_owned(),
            }
        })?),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&j| Some(j) != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no feature columns",
            path.display()
        )));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for &j in &feature_cols {
            let cell = &record[j];
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: header[j].clone(),
                message,
            };
            if cell.is_empty() {
                return Err(parse_err("missing value".into()));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("`{cell}` is not finite")));
            }
            values.push(v);
        }
        if let Some(li) = label_idx {
            let label = &record[li];
            if label.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    column: header[li].clone(),
                    message: "missing label".into(),
                });
            }
            labels.push(label.to_owned());
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyTable(path.to_path_buf()));
    }
    let features = Matrix::from_row_slice(n, feature_cols.len(), &values);
    let names = feature_cols.iter().map(|&j| header[j].clone()).collect();
    Dataset::with_names(features, names, label_idx.map(|_| labels))
}

/// Reads a single label column (ground truth side channel).
pub fn load_labels(path: impl AsRef<Path>, label_column: &str) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn {
            path: path.to_path_buf(),
            column: label_column.to_owned(),
        })?;
    let mut out = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, r + 1, e))?;
        let label = record.get(idx).unwrap_or("");
        if label.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: r + 1,
                column: label_column.to_owned(),
                message: "missing label".into(),
            });
        }
        out.push(label.to_owned());
    }
    if out.is_empty() {
        return Err(Error::EmptyTable(path.to_path_buf()));
    }
    Ok(out)
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column: String::new(),
        message: e.to_string(),
    }
}

/// Writes a dataset in the format read by [`load_dataset`]. Labels, when
/// present, go to a trailing column named `label_column`.
pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset, label_column: &str) -> Result<()> {
    let mut header: Vec<String> = dataset.feature_names().to_vec();
    if dataset.labels().is_some() {
        header.push(label_column.to_owned());
    }
    let rows = (0..dataset.n()).map(|i| {
        let mut row: Vec<String> = dataset
            .features()
            .row(i)
            .iter()
            .map(|v| format_value(*v))
            .collect();
        if let Some(labels) = dataset.labels() {
            row.push(labels[i].clone());
        }
        row
    });
    write_table(path.as_ref(), &header, rows)
}

/// Writes a numeric matrix with the given header.
pub fn write_matrix(path: impl AsRef<Path>, header: &[String], m: &Matrix) -> Result<()> {
    if header.len() != m.ncols() {
        return Err(Error::mismatch("header length must equal column count"));
    }
    let rows = (0..m.nrows()).map(|i| m.row(i).iter().map(|v| format_value(*v)).collect());
    write_table(path.as_ref(), header, rows)
}

/// Writes a single-column label file.
pub fn write_labels(path: impl AsRef<Path>, label_column: &str, labels: &[String]) -> Result<()> {
    let rows = labels.iter().map(|l| vec![l.clone()]);
    write_table(path.as_ref(), &[label_column.to_owned()], rows)
}

fn write_table(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    writer.write_record(header).map_err(io_err)?;
    for row in rows {
        writer.write_record(&row).map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------------------
// Standardization

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardizeMode {
    /// Each domain z-scored with its own statistics.
    #[default]
    PerDomain,
    /// Both domains z-scored with statistics of the concatenated data.
    Pooled,
    /// Data used as given.
    Off,
}

impl std::str::FromStr for StandardizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-domain" => Ok(StandardizeMode::PerDomain),
            "pooled" => Ok(StandardizeMode::Pooled),
            "off" | "none" => Ok(StandardizeMode::Off),
            other => Err(Error::invalid(format!(
                "unknown standardize mode `{other}` (expected per-domain, pooled or off)"
            ))),
        }
    }
}

impl std::fmt::Display for StandardizeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StandardizeMode::PerDomain => "per-domain",
            StandardizeMode::Pooled => "pooled",
            StandardizeMode::Off => "off",
        })
    }
}

/// Columns whose population standard deviation is at or below this are only
/// centered.
const ZERO_STD: f64 = 1e-12;

/// Per-column affine map `x -> (x - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    /// Population (divide by n) statistics of the rows of `features`.
    /// Zero-variance columns get scale 1.
    pub fn fit(features: &Matrix) -> Self {
        let n = features.nrows() as f64;
        let mut mean = Vec::with_capacity(features.ncols());
        let mut scale = Vec::with_capacity(features.ncols());
        for col in features.column_iter() {
            let mu = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(mu);
            scale.push(if sd > ZERO_STD { sd } else { 1.0 });
        }
        Self { mean, scale }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mean: vec![0.0; d],
            scale: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.ncols() != self.dim() {
            return Err(Error::mismatch(format!(
                "scaler expects {} columns, got {}",
                self.dim(),
                features.ncols()
            )));
        }
        let mut out = features.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (mu, s) = (self.mean[j], self.scale[j]);
            for v in col.iter_mut() {
                *v = (*v - mu) / s;
            }
        }
        Ok(out)
    }
}

/// Fits the scalers for a pair under the given mode (source, target).
pub fn fit_scalers(pair: &DomainPair, mode: StandardizeMode) -> (Scaler, Scaler) {
    match mode {
        StandardizeMode::PerDomain => (
            Scaler::fit(pair.source().features()),
            Scaler::fit(pair.target().features()),
        ),
        StandardizeMode::Pooled => {
            let s = pair.source().features();
            let t = pair.target().features();
            let mut stacked = Matrix::zeros(s.nrows() + t.nrows(), s.ncols());
            stacked.rows_mut(0, s.nrows()).copy_from(s);
            stacked.rows_mut(s.nrows(), t.nrows()).copy_from(t);
            let scaler = Scaler::fit(&stacked);
            (scaler.clone(), scaler)
        }
        StandardizeMode::Off => (Scaler::identity(pair.d()), Scaler::identity(pair.d())),
    }
}

/// Z-scores both domains per feature. Inputs are left untouched.
pub fn standardize(pair: &DomainPair, mode: StandardizeMode) -> Result<DomainPair> {
    let (src, tgt) = fit_scalers(pair, mode);
    let source = pair
        .source()
        .with_features(src.apply(pair.source().features())?)?;
    let target = pair
        .target()
        .with_features(tgt.apply(pair.target().features())?)?;
    DomainPair::new(source, target)
}

// ---------------------------------------------------------------------------
// Synthetic domain shift

/// Source/target pair with the target ground truth held apart.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub pair: DomainPair,
    pub target_truth: Vec<String>,
}

/// Shape of the two class blobs drawn by [`make_synthetic_shift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobGeometry {
    /// Mean of each class.
    pub means: [[f64; 2]; 2],
    /// Per-axis standard deviations shared by both classes.
    pub std: [f64; 2],
}

/// Classes four units apart along the first axis, each taller than wide. A
/// translation of about the class spacing along that axis defeats 1NN on the
/// raw features while leaving the cluster structure intact.
impl Default for BlobGeometry {
    fn default() -> Self {
        Self {
            means: [[-2.0, 0.0], [2.0, 0.0]],
            std: [0.7, 1.5],
        }
    }
}

/// Two labeled Gaussian blobs in the plane (source), and an
/// independent draw of the same blobs rotated by `rotation` radians about the
/// sample centroid and translated by `shift` (target).
///
/// Class labels are `"0"` and `"1"`; rows alternate between the classes. The
/// output is a pure function of the arguments.
pub fn make_synthetic_shift(
    seed: u64,
    n_per_class: usize,
    shift: &[f64],
    rotation: f64,
) -> Result<SyntheticPair> {
    make_synthetic_shift_with(BlobGeometry::default(), seed, n_per_class, shift, rotation)
}

/// [`make_synthetic_shift`] with explicit blob geometry.
pub fn make_synthetic_shift_with(
    geometry: BlobGeometry,
    seed: u64,
    n_per_class: usize,
    shift: &[f64],
    rotation: f64,
) -> Result<SyntheticPair> {
    if n_per_class < 5 {
        return Err(Error::invalid(format!(
            "n_per_class must be at least 5, got {n_per_class}"
        )));
    }
    if shift.len() != 2 {
        return Err(Error::mismatch(format!(
            "shift must have 2 components, got {}",
            shift.len()
        )));
    }
    if !rotation.is_finite() || shift.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("shift and rotation must be finite"));
    }
    if geometry.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("blob standard deviations must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = [
        Normal::new(0.0, geometry.std[0]).expect("positive std"),
        Normal::new(0.0, geometry.std[1]).expect("positive std"),
    ];
    let draw = |rng: &mut ChaCha8Rng| -> (Matrix, Vec<String>) {
        let n = 2 * n_per_class;
        let mut x = Matrix::zeros(n, 2);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            for j in 0..2 {
                x[(i, j)] = geometry.means[class][j] + noise[j].sample(rng);
            }
            labels.push(class.to_string());
        }
        (x, labels)
    };

    let (xs, ys) = draw(&mut rng);
    let (mut xt, yt) = draw(&mut rng);

    let n = xt.nrows() as f64;
    let cx = xt.column(0).sum() / n;
    let cy = xt.column(1).sum() / n;
    let (sin, cos) = rotation.sin_cos();
    for i in 0..xt.nrows() {
        let (dx, dy) = (xt[(i, 0)] - cx, xt[(i, 1)] - cy);
        xt[(i, 0)] = cx + cos * dx - sin * dy + shift[0];
        xt[(i, 1)] = cy + sin * dx + cos * dy + shift[1];
    }

    let source = Dataset::new(xs, Some(ys))?;
    let target = Dataset::new(xt, None)?;
    Ok(SyntheticPair {
        pair: DomainPair::new(source, target)?,
        target_truth: yt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_from(s: &[f64], t: &[f64], d: usize) -> DomainPair {
        let ns = s.len() / d;
        let labels = (0..ns).map(|i| (i % 2).to_string()).collect();
        DomainPair::new(
            Dataset::new(Matrix::from_row_slice(ns, d, s), Some(labels)).unwrap(),
            Dataset::new(Matrix::from_row_slice(t.len() / d, d, t), None).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn load_with_and_without_label_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "f1,f2,label\n1,2,a\n3,4,b\n5,6,a\n").unwrap();

        let ds = load_dataset(&path, Some("label")).unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 2));
        assert_eq!(ds.labels().unwrap(), ["a", "b", "a"]);
        assert_eq!(ds.features()[(2, 1)], 6.0);

        std::fs::write(&path, "f1,f2,label\n1,2,7\n3,4,8\n5,6,9\n").unwrap();
        let ds = load_dataset(&path, None).unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 3));
        assert!(ds.labels().is_none());
    }

    #[test]
    fn load_reports_bad_cell_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "f1,f2\n1,2\n3,abc\n").unwrap();
        match load_dataset(&path, None).unwrap_err() {
            Error::Parse { row, column, message, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "f2");
                assert!(message.contains("abc"));
            }
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn load_error_cases() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_dataset(&missing, None), Err(Error::Io { .. })));

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "f1,f2\n").unwrap();
        assert!(matches!(load_dataset(&empty, None), Err(Error::EmptyTable(_))));

        let path = dir.path().join("d.csv");
        std::fs::write(&path, "f1,f2\n1,2\n").unwrap();
        assert!(matches!(
            load_dataset(&path, Some("label")),
            Err(Error::MissingLabelColumn { .. })
        ));

        std::fs::write(&path, "f1,f2\n1,\n").unwrap();
        assert!(matches!(load_dataset(&path, None), Err(Error::Parse { .. })));
    }

    #[test]
    fn write_then_load_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let x = Matrix::from_row_slice(3, 2, &[0.1, 1.0 / 3.0, -2.5e-300, 1e17, 7.0, -0.0]);
        let ds = Dataset::new(x, Some(vec!["x".into(), "y".into(), "x".into()])).unwrap();
        write_dataset(&path, &ds, "label").unwrap();
        let back = load_dataset(&path, Some("label")).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn standardize_population_convention() {
        let p = pair_from(&[1.0, 5.0, 3.0, 5.0], &[0.0, 0.0, 2.0, 0.0], 2);
        let s = standardize(&p, StandardizeMode::PerDomain).unwrap();
        let f = s.source().features();
        assert!((f[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((f[(1, 0)] - 1.0).abs() < 1e-15);
        // constant column is centered only
        assert_eq!(f[(0, 1)], 0.0);
        assert_eq!(f[(1, 1)], 0.0);
        // input untouched
        assert_eq!(p.source().features()[(0, 0)], 1.0);
    }

    #[test]
    fn standardize_is_idempotent() {
        let sp = make_synthetic_shift(3, 10, &[1.0, 2.0], 0.3).unwrap();
        for mode in [StandardizeMode::PerDomain, StandardizeMode::Pooled] {
            let once = standardize(&sp.pair, mode).unwrap();
            let twice = standardize(&once, mode).unwrap();
            let diff = (once.source().features() - twice.source().features()).amax();
            let diff_t = (once.target().features() - twice.target().features()).amax();
            assert!(diff < 1e-12 && diff_t < 1e-12, "{mode}: {diff} {diff_t}");
        }
    }

    #[test]
    fn pooled_mode_shares_statistics() {
        let p = pair_from(&[0.0, 2.0], &[4.0, 6.0], 1);
        let (s, t) = fit_scalers(&p, StandardizeMode::Pooled);
        assert_eq!(s, t);
        assert_eq!(s.mean, vec![3.0]);
    }

    #[test]
    fn class_index_first_appearance() {
        let labels: Vec<String> = ["b", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let idx = ClassIndex::from_labels(&labels);
        assert_eq!(idx.encode(&labels).unwrap(), vec![0, 1, 0, 2]);
        assert!(idx.encode(&["z".to_string()]).is_err());
    }

    #[test]
    fn domain_pair_requires_matching_dims_and_two_classes() {
        let s = Dataset::new(Matrix::zeros(2, 2), Some(vec!["a".into(), "b".into()])).unwrap();
        let t = Dataset::new(Matrix::zeros(2, 3), None).unwrap();
        assert!(DomainPair::new(s.clone(), t).is_err());
        let one = Dataset::new(Matrix::zeros(2, 2), Some(vec!["a".into(), "a".into()])).unwrap();
        let t = Dataset::new(Matrix::zeros(2, 2), None).unwrap();
        assert!(DomainPair::new(one, t.clone()).is_err());
        assert!(DomainPair::new(s, t).is_ok());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = make_synthetic_shift(11, 20, &[3.0, 0.0], 0.5).unwrap();
        let b = make_synthetic_shift(11, 20, &[3.0, 0.0], 0.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pair.source().n(), 40);
        assert_eq!(a.target_truth.len(), 40);
        assert!(a.pair.target().labels().is_none());
        let c = make_synthetic_shift(12, 20, &[3.0, 0.0], 0.5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_identity_shift_draws_distinct_samples() {
        let sp = make_synthetic_shift(1, 10, &[0.0, 0.0], 0.0).unwrap();
        assert_ne!(sp.pair.source().features(), sp.pair.target().features());
    }

    #[test]
    fn synthetic_rejects_bad_arguments() {
        assert!(make_synthetic_shift(1, 4, &[0.0, 0.0], 0.0).is_err());
        assert!(make_synthetic_shift(1, 0, &[0.0, 0.0], 0.0).is_err());
        assert!(make_synthetic_shift(1, 10, &[0.0], 0.0).is_err());
    }
}
