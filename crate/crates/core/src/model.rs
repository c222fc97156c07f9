//! The trained embedding artifact.
//!
//! An [`EmbeddingModel`] bundles the training anchors, their embedding `Y`,
//! the interpolator coefficients `C` solving `(Psi + ridge*I) C = Y`, the
//! kernel scale, and the preprocessing record. Evaluating the interpolator at
//! a query `x` is `f(x) = C' phi(x)` with `phi_i(x) = exp(-||x - x_i||^2 / sigma^2)`,
//! so the model maps every anchor (essentially) onto its own embedding and
//! extends smoothly in between.
//!
//! Models serialize to a versioned JSON document with round-trip-exact
//! floats, so a saved model reloads bit-identically.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Standardizer;
use crate::error::{Error, Result};
use crate::kernel::{kernel_lipschitz, kernel_matrix, kernel_vector};

/// Version tag carried by every model file.
pub const MODEL_FORMAT_VERSION: &str = "nsse-model/1";

/// Training hyperparameters recorded with the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub k: usize,
    /// Gaussian width of the within-class graph weights.
    pub beta: f64,
}

/// A trained embedding with its out-of-sample interpolator.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    anchors: DMatrix<f64>,
    embedding: DMatrix<f64>,
    coefficients: DMatrix<f64>,
    sigma: f64,
    ridge: f64,
    labels: Vec<usize>,
    hyperparams: Hyperparams,
    preprocessing: Option<Standardizer>,
}

impl EmbeddingModel {
    /// Assemble and validate a model.
    ///
    /// Checks shapes, finiteness, and that the coefficients actually solve
    /// the regularized interpolation system: `||(Psi + ridge*I) C - Y||_F`
    /// must stay within `1e-8 * (1 + ||Y||_F)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        anchors: DMatrix<f64>,
        embedding: DMatrix<f64>,
        coefficients: DMatrix<f64>,
        sigma: f64,
        ridge: f64,
        labels: Vec<usize>,
        hyperparams: Hyperparams,
        preprocessing: Option<Standardizer>,
    ) -> Result<Self> {
        let n = anchors.nrows();
        if n == 0 || anchors.ncols() == 0 {
            return Err(Error::InvalidParameter("model needs at least one anchor".into()));
        }
        if embedding.nrows() != n || coefficients.nrows() != n || labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "anchors have {n} rows; embedding has {}, coefficients {}, labels {}",
                embedding.nrows(),
                coefficients.nrows(),
                labels.len()
            )));
        }
        if embedding.ncols() != coefficients.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "embedding is {}-dimensional but coefficients have {} columns",
                embedding.ncols(),
                coefficients.ncols()
            )));
        }
        if embedding.ncols() == 0 || embedding.ncols() > n {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension {} out of range 1..={n}",
                embedding.ncols()
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
        }
        if !(ridge >= 0.0) {
            return Err(Error::InvalidParameter(format!("ridge = {ridge} must be nonnegative")));
        }
        if let Some(pre) = &preprocessing {
            if pre.means.len() != anchors.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "preprocessing record covers {} features, anchors have {}",
                    pre.means.len(),
                    anchors.ncols()
                )));
            }
        }
        for (name, m) in [
            ("anchors", &anchors),
            ("embedding", &embedding),
            ("coefficients", &coefficients),
        ] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} contain non-finite values")));
            }
        }
        let psi = kernel_matrix(&anchors, sigma)?;
        let mut reconstructed = psi.as_matrix() * &coefficients;
        for j in 0..reconstructed.ncols() {
            for i in 0..n {
                reconstructed[(i, j)] += ridge * coefficients[(i, j)];
            }
        }
        let residual = (&reconstructed - &embedding).norm();
        let allowed = 1e-8 * (1.0 + embedding.norm());
        if residual > allowed {
            return Err(Error::InvalidParameter(format!(
                "coefficients do not solve the interpolation system: residual {residual:.3e} \
                 exceeds {allowed:.3e}"
            )));
        }
        Ok(EmbeddingModel {
            anchors,
            embedding,
            coefficients,
            sigma,
            ridge,
            labels,
            hyperparams,
            preprocessing,
        })
    }

    /// Attach a preprocessing record; queries get transformed before kernel
    /// evaluation, the anchors are expected to already live in the
    /// transformed space.
    pub fn with_preprocessing(mut self, record: Standardizer) -> Result<Self> {
        if record.means.len() != self.anchors.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "preprocessing record covers {} features, anchors have {}",
                record.means.len(),
                self.anchors.ncols()
            )));
        }
        self.preprocessing = Some(record);
        Ok(self)
    }

    pub fn anchors(&self) -> &DMatrix<f64> {
        &self.anchors
    }

    /// Embedding of the training anchors, one row per anchor.
    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.embedding
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn preprocessing(&self) -> Option<&Standardizer> {
        self.preprocessing.as_ref()
    }

    pub fn num_anchors(&self) -> usize {
        self.anchors.nrows()
    }

    /// Ambient (input) dimension.
    pub fn ambient_dim(&self) -> usize {
        self.anchors.ncols()
    }

    /// Embedding dimension.
    pub fn embed_dim(&self) -> usize {
        self.embedding.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Map one query point into the embedded domain.
    ///
    /// The stored preprocessing (if any) is applied first, so queries live in
    /// the same raw space as the training file.
    pub fn embed_point(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("query contains non-finite values".into()));
        }
        let transformed;
        let query = match &self.preprocessing {
            Some(pre) => {
                transformed = pre.transform_vector(x)?;
                &transformed
            }
            None => {
                if x.len() != self.ambient_dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "query has {} features, model expects {}",
                        x.len(),
                        self.ambient_dim()
                    )));
                }
                x
            }
        };
        let phi = kernel_vector(&self.anchors, self.sigma, query);
        let d = self.embed_dim();
        let mut out = DVector::zeros(d);
        for k in 0..d {
            let mut acc = 0.0;
            for i in 0..self.num_anchors() {
                acc += self.coefficients[(i, k)] * phi[i];
            }
            out[k] = acc;
        }
        Ok(out)
    }

    /// Row-wise [`Self::embed_point`]; bit-identical to the per-point calls.
    pub fn embed_batch(&self, queries: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d = self.embed_dim();
        if queries.nrows() == 0 {
            return Ok(DMatrix::zeros(0, d));
        }
        let rows: Vec<DVector<f64>> = (0..queries.nrows())
            .into_par_iter()
            .map(|i| self.embed_point(&queries.row(i).transpose()))
            .collect::<Result<Vec<_>>>()?;
        let mut out = DMatrix::zeros(queries.nrows(), d);
        for (i, row) in rows.iter().enumerate() {
            out.set_row(i, &row.transpose());
        }
        Ok(out)
    }

    /// Certified Lipschitz upper bound `sqrt(N) * L_phi * ||C||_F` of the
    /// interpolator.
    pub fn lipschitz_bound(&self) -> f64 {
        let l_phi = kernel_lipschitz(self.sigma).expect("sigma validated positive");
        (self.num_anchors() as f64).sqrt() * l_phi * self.coefficients.norm()
    }

    /// Write the model as a versioned JSON document.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile::from_model(self);
        let mut text =
            serde_json::to_string_pretty(&file).map_err(|e| Error::ModelSchema(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Read a model back; the inverse of [`Self::save`], bit-exact.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| parse_error(&text, &e))?;
        let found = value
            .get("version")
            .and_then(|v| v.as_str())
            .unwrap_or("<missing>")
            .to_owned();
        if found != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found,
                expected: MODEL_FORMAT_VERSION.to_owned(),
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::ModelSchema(e.to_string()))?;
        file.into_model()
    }
}

impl fmt::Display for EmbeddingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "embedding model: {} anchors in R^{} -> R^{}, {} classes, sigma {:.6}, ridge {:.1e}",
            self.num_anchors(),
            self.ambient_dim(),
            self.embed_dim(),
            self.num_classes(),
            self.sigma,
            self.ridge
        )
    }
}

fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    let line = e.line();
    let column = e.column();
    Error::ModelParse {
        offset: byte_offset(text, line, column),
        line,
        column,
        message: e.to_string(),
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining = line - 1;
    let mut offset = 0;
    for (idx, b) in text.bytes().enumerate() {
        if remaining == 0 {
            break;
        }
        if b == b'\n' {
            remaining -= 1;
            offset = idx + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(text.len())
}

/// On-disk schema. Matrices are row-major nested arrays for inspectability.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    version: String,
    /// Ambient dimension.
    n: usize,
    /// Number of anchors.
    #[serde(rename = "N")]
    num_anchors: usize,
    /// Embedding dimension.
    d: usize,
    sigma: f64,
    ridge: f64,
    anchors: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    embedding: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    coefficients: Vec<Vec<f64>>,
    labels: Vec<usize>,
    hyperparams: Hyperparams,
    preprocessing: Option<Standardizer>,
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn rows_to_matrix(
    rows: &[Vec<f64>],
    expected_rows: usize,
    expected_cols: usize,
    what: &str,
) -> Result<DMatrix<f64>> {
    if rows.len() != expected_rows {
        return Err(Error::ModelSchema(format!(
            "{what}: expected {expected_rows} rows, found {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expected_cols {
            return Err(Error::ModelSchema(format!(
                "{what}: row {i} has {} entries, expected {expected_cols}",
                row.len()
            )));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(expected_rows, expected_cols, &flat))
}

impl ModelFile {
    fn from_model(m: &EmbeddingModel) -> Self {
        ModelFile {
            version: MODEL_FORMAT_VERSION.to_owned(),
            n: m.ambient_dim(),
            num_anchors: m.num_anchors(),
            d: m.embed_dim(),
            sigma: m.sigma,
            ridge: m.ridge,
            anchors: matrix_to_rows(&m.anchors),
            embedding: matrix_to_rows(&m.embedding),
            coefficients: matrix_to_rows(&m.coefficients),
            labels: m.labels.clone(),
            hyperparams: m.hyperparams,
            preprocessing: m.preprocessing.clone(),
        }
    }

    fn into_model(self) -> Result<EmbeddingModel> {
        let anchors = rows_to_matrix(&self.anchors, self.num_anchors, self.n, "anchors")?;
        let embedding = rows_to_matrix(&self.embedding, self.num_anchors, self.d, "Y")?;
        let coefficients = rows_to_matrix(&self.coefficients, self.num_anchors, self.d, "C")?;
        if self.labels.len() != self.num_anchors {
            return Err(Error::ModelSchema(format!(
                "labels: expected {} entries, found {}",
                self.num_anchors,
                self.labels.len()
            )));
        }
        EmbeddingModel::new(
            anchors,
            embedding,
            coefficients,
            self.sigma,
            self.ridge,
            self.labels,
            self.hyperparams,
            self.preprocessing,
        )
    }
}
