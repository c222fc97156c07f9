//! Labeled datasets: CSV ingestion, synthetic fixtures, stratified splits,
//! and feature standardization.
//!
//! All generators and the splitter are pure functions of their seeds, so any
//! experiment is reproducible from its configuration alone.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A feature matrix with one integer class label per row.
///
/// Labels are contiguous in `[0, M)` and every class has at least one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    x: DMatrix<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    /// Build a dataset, validating shape, label contiguity, and finiteness.
    pub fn new(
        x: DMatrix<f64>,
        labels: Vec<usize>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one sample and one feature, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if labels.len() != x.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        if let Some(names) = &feature_names {
            if names.len() != x.ncols() {
                return Err(Error::InvalidDataset(format!(
                    "{} feature columns but {} feature names",
                    x.ncols(),
                    names.len()
                )));
            }
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature value {bad}"
            )));
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDataset(format!(
                "class {missing} has no samples; labels must be contiguous in [0, {num_classes})"
            )));
        }
        Ok(LabeledDataset {
            x,
            labels,
            num_classes,
            feature_names,
        })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Number of samples in each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Dataset restricted to the given row indices (kept in the given order).
    ///
    /// If a class is entirely absent from the selection, labels are compacted
    /// to stay contiguous while preserving their relative order, so two
    /// selections covering the same classes stay label-compatible.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut x = DMatrix::zeros(rows.len(), self.x.ncols());
        let mut labels = Vec::with_capacity(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            x.set_row(out, &self.x.row(r));
            labels.push(self.labels[r]);
        }
        let mut surviving: Vec<usize> = labels.clone();
        surviving.sort_unstable();
        surviving.dedup();
        if surviving.len() < self.num_classes {
            let rank: HashMap<usize, usize> =
                surviving.iter().enumerate().map(|(r, &l)| (l, r)).collect();
            for l in labels.iter_mut() {
                *l = rank[l];
            }
        }
        LabeledDataset::new(x, labels, self.feature_names.clone())
    }
}

/// A stratified train/test split request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Training samples drawn from every class.
    pub per_class_train: usize,
    pub seed: u64,
}

/// How to find the label column in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

/// Load a labeled dataset from a comma-separated UTF-8 file.
///
/// The label column may hold strings or numbers; labels are re-mapped to
/// contiguous integers `[0, M)` in order of first appearance. All other
/// columns must be finite numbers. Row order is preserved.
pub fn load_csv(path: &Path, label_column: &LabelColumn, has_header: bool) -> Result<LabeledDataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .from_reader(file);

    let csv_err = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };

    let headers: Option<Vec<String>> = if has_header {
        let rec = reader
            .headers()
            .map_err(|e| csv_err(format!("failed to read header: {e}")))?;
        Some(rec.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label_keys: Vec<String> = Vec::new();
    let mut label_index: Option<usize> = None;
    let mut num_file_cols: Option<usize> = None;

    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(format!("row {}: {e}", row_idx + 1)))?;
        let ncols = record.len();
        if row_idx == 0 {
            num_file_cols = Some(ncols);
            label_index = Some(match label_column {
                LabelColumn::Index(i) => {
                    if *i >= ncols {
                        return Err(csv_err(format!(
                            "label column index {i} out of range for {ncols} columns"
                        )));
                    }
                    *i
                }
                LabelColumn::Name(name) => {
                    let headers = headers.as_ref().ok_or_else(|| {
                        csv_err(format!(
                            "label column {name:?} requested by name but the file has no header"
                        ))
                    })?;
                    headers
                        .iter()
                        .position(|h| h == name)
                        .ok_or_else(|| csv_err(format!("label column {name:?} not found in header")))?
                }
            });
        }
        let label_idx = label_index.unwrap();
        let mut features = Vec::with_capacity(ncols - 1);
        for (col_idx, cell) in record.iter().enumerate() {
            if col_idx == label_idx {
                label_keys.push(cell.to_owned());
                continue;
            }
            let value: f64 = cell.trim().parse().map_err(|_| {
                csv_err(format!(
                    "non-numeric feature cell {:?} at row {}, column {}",
                    cell,
                    row_idx + 1,
                    col_idx + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(csv_err(format!(
                    "non-finite feature value {:?} at row {}, column {}",
                    cell,
                    row_idx + 1,
                    col_idx + 1
                )));
            }
            features.push(value);
        }
        rows.push(features);
    }

    if rows.is_empty() {
        return Err(csv_err("file contains no data rows".into()));
    }
    let n_features = num_file_cols.unwrap() - 1;
    if n_features == 0 {
        return Err(csv_err("file has a label column but no feature columns".into()));
    }

    // First-appearance label mapping.
    let mut mapping: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(label_keys.len());
    for key in &label_keys {
        let next = mapping.len();
        labels.push(*mapping.entry(key.clone()).or_insert(next));
    }

    let feature_names = headers.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| *i != label_index.unwrap())
            .map(|(_, name)| name)
            .collect::<Vec<_>>()
    });

    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let x = DMatrix::from_row_slice(rows.len(), n_features, &flat);
    LabeledDataset::new(x, labels, feature_names)
}

/// Write a dataset as CSV with the label in the first column.
pub fn write_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut header = vec!["label".to_owned()];
    match ds.feature_names() {
        Some(names) => header.extend(names.iter().cloned()),
        None => header.extend((0..ds.num_features()).map(|j| format!("x{j}"))),
    }
    writer.write_record(&header).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for i in 0..ds.num_samples() {
        let mut record = vec![ds.labels()[i].to_string()];
        record.extend(ds.features().row(i).iter().map(|v| format!("{v}")));
        writer.write_record(&record).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    writer.flush().map_err(io_err)
}

/// Stratified split: exactly `per_class_train` samples of every class go to
/// the training set, the remainder to the test set.
///
/// Selection is a seeded per-class shuffle; row order within each part
/// follows the original dataset order.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    if spec.per_class_train == 0 {
        return Err(Error::InvalidParameter(
            "per_class_train must be positive".into(),
        ));
    }
    let counts = ds.class_counts();
    if let Some((class, &count)) = counts
        .iter()
        .enumerate()
        .find(|(_, &c)| c <= spec.per_class_train)
    {
        return Err(Error::InvalidParameter(format!(
            "per_class_train = {} but class {class} has only {count} samples",
            spec.per_class_train
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for class in 0..ds.num_classes() {
        let mut members: Vec<usize> = (0..ds.num_samples())
            .filter(|&i| ds.labels()[i] == class)
            .collect();
        members.shuffle(&mut rng);
        let (sel, rest) = members.split_at(spec.per_class_train);
        train_rows.extend_from_slice(sel);
        test_rows.extend_from_slice(rest);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((ds.select(&train_rows)?, ds.select(&test_rows)?))
}

/// Isotropic Gaussian blobs with class centers on a deterministic axis
/// lattice: class `m` sits at `separation * (1 + m / dims)` along axis
/// `m % dims`.
pub fn synth_blobs(
    classes: usize,
    per_class: usize,
    dims: usize,
    spread: f64,
    separation: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if classes == 0 || per_class == 0 || dims == 0 {
        return Err(Error::InvalidParameter(
            "classes, per_class, and dims must be positive".into(),
        ));
    }
    if !(spread >= 0.0) || !(separation > 0.0) {
        return Err(Error::InvalidParameter(
            "spread must be nonnegative and separation positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = classes * per_class;
    let mut x = DMatrix::zeros(n, dims);
    let mut labels = Vec::with_capacity(n);
    for m in 0..classes {
        let axis = m % dims;
        let radius = separation * (1 + m / dims) as f64;
        for i in 0..per_class {
            let row = m * per_class + i;
            for j in 0..dims {
                let center = if j == axis { radius } else { 0.0 };
                let noise: f64 = rng.sample(StandardNormal);
                x[(row, j)] = center + spread * noise;
            }
            labels.push(m);
        }
    }
    LabeledDataset::new(x, labels, None)
}

/// Two interleaved half-circles in the plane, `per_class` points each, with
/// isotropic Gaussian noise of standard deviation `noise`.
pub fn synth_moons(per_class: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    if per_class == 0 {
        return Err(Error::InvalidParameter("per_class must be positive".into()));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidParameter("noise must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * per_class;
    let mut x = DMatrix::zeros(n, 2);
    let mut labels = vec![0usize; n];
    let step = if per_class > 1 {
        std::f64::consts::PI / (per_class - 1) as f64
    } else {
        0.0
    };
    for i in 0..per_class {
        let t = step * i as f64;
        x[(i, 0)] = t.cos();
        x[(i, 1)] = t.sin();
        x[(per_class + i, 0)] = 1.0 - t.cos();
        x[(per_class + i, 1)] = 0.5 - t.sin();
        labels[per_class + i] = 1;
    }
    // Noise is added row-major so the stream is independent of storage layout.
    for i in 0..n {
        for j in 0..2 {
            let e: f64 = rng.sample(StandardNormal);
            x[(i, j)] += noise * e;
        }
    }
    LabeledDataset::new(x, labels, None)
}

/// Per-feature centering/scaling record, sufficient to transform new data
/// exactly as the training data was transformed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population (1/N) standard deviations; entries below `1e-12` mark
    /// features that are centered but not scaled.
    pub stds: Vec<f64>,
}

const STD_FLOOR: f64 = 1e-12;

impl Standardizer {
    pub fn transform_value(&self, j: usize, v: f64) -> f64 {
        let centered = v - self.means[j];
        if self.stds[j] < STD_FLOOR {
            centered
        } else {
            centered / self.stds[j]
        }
    }

    pub fn transform_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "standardizer fitted on {} features, input has {}",
                self.means.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for j in 0..out.ncols() {
            for i in 0..out.nrows() {
                out[(i, j)] = self.transform_value(j, x[(i, j)]);
            }
        }
        Ok(out)
    }

    pub fn transform_vector(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "standardizer fitted on {} features, input has {}",
                self.means.len(),
                x.len()
            )));
        }
        Ok(DVector::from_fn(x.len(), |j, _| self.transform_value(j, x[j])))
    }
}

/// Center every feature to mean zero and scale to unit population standard
/// deviation; near-constant features (std below `1e-12`) are only centered.
pub fn standardize(ds: &LabeledDataset) -> Result<(LabeledDataset, Standardizer)> {
    let n = ds.num_samples();
    if n < 2 {
        return Err(Error::InvalidDataset(
            "standardize needs at least two samples".into(),
        ));
    }
    let x = ds.features();
    let mut means = Vec::with_capacity(x.ncols());
    let mut stds = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col = x.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        means.push(mean);
        stds.push(var.sqrt());
    }
    let record = Standardizer { means, stds };
    let transformed = record.transform_matrix(x)?;
    let ds = LabeledDataset::new(transformed, ds.labels().to_vec(), ds.feature_names().map(<[String]>::to_vec))?;
    Ok((ds, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    fn tmp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_direct_transcription() {
        let f = tmp_csv("lbl,a,b\n0,1.0,2.0\n1,3.0,4.0\n");
        let ds = load_csv(f.path(), &LabelColumn::Index(0), true).unwrap();
        assert_eq!(ds.num_samples(), 2);
        assert_eq!(ds.num_features(), 2);
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.features().as_slice(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).as_slice());
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(ds.feature_names().unwrap(), &["a".to_owned(), "b".to_owned()]);
    }

    #[test]
    fn load_csv_first_appearance_mapping() {
        let f = tmp_csv("lbl,a\ncat,1.0\ndog,2.0\ncat,3.0\n");
        let ds = load_csv(f.path(), &LabelColumn::Name("lbl".into()), true).unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.num_classes(), 2);
    }

    #[test]
    fn load_csv_bad_cell_names_row_and_column() {
        let f = tmp_csv("lbl,a,b\n0,abc,2.0\n");
        let err = load_csv(f.path(), &LabelColumn::Index(0), true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1"), "message was: {msg}");
        assert!(msg.contains("column 2"), "message was: {msg}");
    }

    #[test]
    fn load_csv_empty_file_and_single_row() {
        let f = tmp_csv("lbl,a\n");
        assert!(load_csv(f.path(), &LabelColumn::Index(0), true).is_err());

        let f = tmp_csv("lbl,a\n3,1.5\n");
        let ds = load_csv(f.path(), &LabelColumn::Index(0), true).unwrap();
        assert_eq!(ds.num_samples(), 1);
        assert_eq!(ds.labels(), &[0]);
    }

    #[test]
    fn load_csv_missing_file() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), &LabelColumn::Index(0), true);
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    #[test]
    fn split_counts_and_boundary() {
        let ds = synth_blobs(3, 5, 2, 0.1, 10.0, 1).unwrap();
        let (train, test) = split(&ds, &SplitSpec { per_class_train: 2, seed: 7 }).unwrap();
        assert_eq!(train.num_samples(), 6);
        assert_eq!(test.num_samples(), 9);
        assert_eq!(train.class_counts(), vec![2, 2, 2]);

        let ds = synth_blobs(2, 10, 2, 0.1, 10.0, 1).unwrap();
        assert!(split(&ds, &SplitSpec { per_class_train: 10, seed: 0 }).is_err());
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let ds = synth_blobs(3, 7, 4, 0.5, 5.0, 3).unwrap();
        let spec = SplitSpec { per_class_train: 3, seed: 42 };
        let (tr1, te1) = split(&ds, &spec).unwrap();
        let (tr2, te2) = split(&ds, &spec).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);

        // Union as multisets: every original row appears exactly once.
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for part in [&tr1, &te1] {
            for i in 0..part.num_samples() {
                rows.push(part.features().row(i).iter().map(|v| v.to_bits()).collect());
            }
        }
        rows.sort();
        let mut original: Vec<Vec<u64>> = (0..ds.num_samples())
            .map(|i| ds.features().row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        original.sort();
        assert_eq!(rows, original);
    }

    #[test]
    fn blobs_zero_spread_hits_centers() {
        let ds = synth_blobs(3, 4, 5, 0.0, 10.0, 9).unwrap();
        for i in 0..ds.num_samples() {
            let m = ds.labels()[i];
            for j in 0..5 {
                let expected = if j == m % 5 { 10.0 } else { 0.0 };
                assert_eq!(ds.features()[(i, j)], expected);
            }
        }
    }

    #[test]
    fn blobs_are_ambient_separable() {
        // Ambient nearest-neighbor as the oracle: with separation 100 and
        // spread 0.1 every split classifies perfectly.
        let ds = synth_blobs(2, 12, 3, 0.1, 100.0, 11).unwrap();
        let (train, test) = split(&ds, &SplitSpec { per_class_train: 4, seed: 5 }).unwrap();
        let report = crate::classify::ambient_nn(&train, &test).unwrap();
        assert_eq!(report.error_rate, 0.0);
    }

    #[test]
    fn generators_deterministic() {
        assert_eq!(
            synth_blobs(3, 5, 2, 0.3, 8.0, 17).unwrap(),
            synth_blobs(3, 5, 2, 0.3, 8.0, 17).unwrap()
        );
        assert_eq!(synth_moons(40, 0.2, 23).unwrap(), synth_moons(40, 0.2, 23).unwrap());
    }

    #[test]
    fn moons_noise_free_geometry() {
        let ds = synth_moons(1, 0.0, 0).unwrap();
        assert_eq!(ds.num_samples(), 2);
        assert_abs_diff_eq!(ds.features()[(0, 0)], 1.0);
        assert_abs_diff_eq!(ds.features()[(0, 1)], 0.0);
        assert_abs_diff_eq!(ds.features()[(1, 0)], 0.0);
        assert_abs_diff_eq!(ds.features()[(1, 1)], 0.5);

        let ds = synth_moons(25, 0.0, 0).unwrap();
        for i in 0..25 {
            let (x, y) = (ds.features()[(i, 0)], ds.features()[(i, 1)]);
            assert_abs_diff_eq!(x * x + y * y, 1.0, epsilon = 1e-12);
        }
    }

    /// Exact separability oracle: two point sets admit a separating
    /// hyperplane iff their convex hulls are disjoint.
    mod hull {
        pub fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            if pts.len() < 3 {
                return pts;
            }
            let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
                (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
            };
            let mut hull: Vec<(f64, f64)> = Vec::new();
            for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
                while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
                {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
            hull
        }

        pub fn contains(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
            if hull.len() < 3 {
                return false;
            }
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross < 0.0 {
                    return false;
                }
            }
            true
        }
    }

    #[test]
    fn moons_not_linearly_separable() {
        let ds = synth_moons(20, 0.0, 0).unwrap();
        let class_points = |c: usize| -> Vec<(f64, f64)> {
            (0..ds.num_samples())
                .filter(|&i| ds.labels()[i] == c)
                .map(|i| (ds.features()[(i, 0)], ds.features()[(i, 1)]))
                .collect()
        };
        let hull0 = hull::convex_hull(class_points(0));
        let hull1 = hull::convex_hull(class_points(1));
        let overlap = class_points(1).iter().any(|&p| hull::contains(&hull0, p))
            || class_points(0).iter().any(|&p| hull::contains(&hull1, p));
        assert!(overlap, "hulls disjoint, classes would be linearly separable");
    }

    #[test]
    fn standardize_hand_case_and_constant_feature() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 5.0, 2.0, 5.0]);
        let ds = LabeledDataset::new(x, vec![0, 1], None).unwrap();
        let (out, record) = standardize(&ds).unwrap();
        assert_abs_diff_eq!(out.features()[(0, 0)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.features()[(1, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(record.means[0], 1.0);
        assert_abs_diff_eq!(record.stds[0], 1.0);
        // Constant feature: centered only.
        assert_eq!(out.features()[(0, 1)], 0.0);
        assert_eq!(out.features()[(1, 1)], 0.0);
        assert!(record.stds[1] < 1e-12);
    }

    #[test]
    fn standardize_idempotent() {
        let ds = synth_blobs(2, 20, 3, 1.0, 4.0, 2).unwrap();
        let (once, _) = standardize(&ds).unwrap();
        let (twice, _) = standardize(&once).unwrap();
        for (a, b) in once.features().iter().zip(twice.features().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn write_then_load_round_trip() {
        let ds = synth_blobs(3, 4, 2, 0.2, 6.0, 31).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_csv(&ds, &path).unwrap();
        let loaded = load_csv(&path, &LabelColumn::Index(0), true).unwrap();
        assert_eq!(loaded.labels(), ds.labels());
        for (a, b) in loaded.features().iter().zip(ds.features().iter()) {
            assert_eq!(a, b, "float text round trip must be exact");
        }
    }
}
