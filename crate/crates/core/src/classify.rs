//! Nearest-neighbor classification in the embedded domain, evaluation
//! metrics, and the two reference baselines: a supervised Laplacian embedding
//! extended with the same RBF interpolator, and plain nearest neighbor in the
//! ambient space.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::{ClassGraph, Symmetrization};
use crate::kernel::KernelSystem;
use crate::model::{EmbeddingModel, Hyperparams};
use crate::numerics::{symmetric_eigen, SymMatrix};
use crate::optimizer::{search_sigma, TrainConfig};

/// Classification outcome over a test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Fraction of misclassified test samples.
    pub error_rate: f64,
    /// `confusion[t][p]` counts true class `t` predicted as `p`.
    pub confusion: Vec<Vec<usize>>,
    /// Misclassification fraction per true class (zero for absent classes).
    pub per_class_error: Vec<f64>,
    pub n_test: usize,
}

impl EvalReport {
    fn from_predictions(truth: &[usize], predicted: &[usize], num_classes: usize) -> Self {
        let n_test = truth.len();
        let mut confusion = vec![vec![0usize; num_classes]; num_classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let mut correct = 0usize;
        let mut per_class_error = vec![0.0; num_classes];
        for (c, row) in confusion.iter().enumerate() {
            let total: usize = row.iter().sum();
            correct += row[c];
            if total > 0 {
                per_class_error[c] = (total - row[c]) as f64 / total as f64;
            }
        }
        EvalReport {
            error_rate: 1.0 - correct as f64 / n_test as f64,
            confusion,
            per_class_error,
            n_test,
        }
    }

    /// Misclassification rate in percent.
    pub fn error_percent(&self) -> f64 {
        100.0 * self.error_rate
    }

    /// One row per class plus an `overall` summary row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("class,test_count,errors,error_rate\n");
        let mut total_errors = 0usize;
        for (c, row) in self.confusion.iter().enumerate() {
            let count: usize = row.iter().sum();
            let errors = count - row[c];
            total_errors += errors;
            out.push_str(&format!("{c},{count},{errors},{}\n", self.per_class_error[c]));
        }
        out.push_str(&format!("overall,{},{total_errors},{}\n", self.n_test, self.error_rate));
        out
    }
}

/// Label of the training embedding nearest to `query` (Euclidean, distance
/// ties toward the lower index).
pub fn nn_label(embedding: &DMatrix<f64>, labels: &[usize], query: &DVector<f64>) -> usize {
    assert!(embedding.nrows() >= 1, "nearest neighbor needs at least one row");
    assert_eq!(embedding.nrows(), labels.len(), "one label per embedded row");
    assert_eq!(embedding.ncols(), query.len(), "query dimension mismatch");
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    for i in 0..embedding.nrows() {
        let mut d2 = 0.0;
        for c in 0..embedding.ncols() {
            let d = embedding[(i, c)] - query[c];
            d2 += d * d;
        }
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    labels[best]
}

/// Embed a test set through the model and classify by nearest training
/// embedding.
pub fn evaluate(model: &EmbeddingModel, test: &LabeledDataset) -> Result<EvalReport> {
    if test.num_features() != model.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "test data has {} features, model expects {}",
            test.num_features(),
            model.ambient_dim()
        )));
    }
    let embedded = model.embed_batch(test.features())?;
    let predictions: Vec<usize> = (0..embedded.nrows())
        .into_par_iter()
        .map(|i| nn_label(model.embedding(), model.labels(), &embedded.row(i).transpose()))
        .collect();
    let num_classes = model.num_classes().max(test.num_classes());
    Ok(EvalReport::from_predictions(test.labels(), &predictions, num_classes))
}

/// Supervised Laplacian embedding baseline with the same RBF extension.
///
/// The embedding solves `min tr(Y' (Lw - mu*Lb) Y)` over orthonormal `Y`; the
/// kernel scale is then fitted post hoc with the same scale criterion the
/// joint method uses (at the default regularity weights), and the
/// coefficients solve the identical regularized system. Differences to the
/// joint method are therefore attributable to the objective, not the
/// plumbing.
pub fn train_suplap(
    ds: &LabeledDataset,
    dim: usize,
    mu: f64,
    k: usize,
    sigma_grid: &[f64],
    ridge: f64,
) -> Result<EmbeddingModel> {
    let n = ds.num_samples();
    if dim == 0 || dim > n {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension {dim} out of range 1..={n}"
        )));
    }
    let graph = ClassGraph::build(ds.features(), ds.labels(), k, Symmetrization::Union)?;
    let a = SymMatrix::new(graph.lap_within.as_matrix() - graph.lap_between.as_matrix() * mu)?;
    let embedding = symmetric_eigen(&a, dim)?.vectors;
    let defaults = TrainConfig::default();
    let sigma = search_sigma(
        &embedding,
        ds.features(),
        sigma_grid,
        defaults.mu2,
        defaults.mu3,
        ridge,
    )?;
    let system = KernelSystem::new(ds.features(), sigma, ridge)?;
    let coefficients = system.solve(&embedding)?;
    EmbeddingModel::new(
        ds.features().clone(),
        embedding,
        coefficients,
        sigma,
        system.ridge(),
        ds.labels().to_vec(),
        Hyperparams {
            mu1: mu,
            mu2: defaults.mu2,
            mu3: defaults.mu3,
            k,
            beta: graph.beta,
        },
        None,
    )
}

/// Plain 1-nearest-neighbor classification in the original feature space.
pub fn ambient_nn(train: &LabeledDataset, test: &LabeledDataset) -> Result<EvalReport> {
    if test.num_features() != train.num_features() {
        return Err(Error::DimensionMismatch(format!(
            "test data has {} features, training data has {}",
            test.num_features(),
            train.num_features()
        )));
    }
    let predictions: Vec<usize> = (0..test.num_samples())
        .into_par_iter()
        .map(|i| nn_label(train.features(), train.labels(), &test.features().row(i).transpose()))
        .collect();
    let num_classes = train.num_classes().max(test.num_classes());
    Ok(EvalReport::from_predictions(test.labels(), &predictions, num_classes))
}
