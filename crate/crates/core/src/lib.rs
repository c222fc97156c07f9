//! Supervised nonlinear dimensionality reduction with a jointly learned
//! Gaussian RBF out-of-sample interpolator.
//!
//! The toolkit learns, for a labeled dataset, a low-dimensional embedding of
//! the training samples together with a smooth radial-basis-function
//! interpolator that extends the embedding to arbitrary inputs. The two are
//! optimized jointly by alternating between an eigenvector update of the
//! embedding and a grid search over the kernel scale, trading class
//! separation against the regularity (Lipschitz constant) of the
//! interpolator. Classification of new points is nearest-neighbor in the
//! embedded domain.
//!
//! Modules follow the pipeline: [`dataset`] ingestion and synthetic fixtures,
//! [`graph`] neighborhood structure, [`kernel`] RBF systems, [`optimizer`]
//! alternating training and cross-validation, [`model`] the trained artifact,
//! [`classify`] evaluation and baselines, and [`diagnostics`] the margin /
//! regularity condition report.

pub mod classify;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod model;
pub mod numerics;
pub mod optimizer;

pub use classify::{ambient_nn, evaluate, nn_label, train_suplap, EvalReport};
pub use dataset::{
    load_csv, split, standardize, synth_blobs, synth_moons, LabelColumn, LabeledDataset,
    SplitSpec, Standardizer,
};
pub use diagnostics::{diagnose, DiagnosticsReport};
pub use error::{Error, Result};
pub use graph::{class_weights, heuristic_beta, knn_edges, laplacian, ClassGraph, Symmetrization};
pub use kernel::{kernel_lipschitz, kernel_matrix, KernelSystem};
pub use model::{EmbeddingModel, Hyperparams, MODEL_FORMAT_VERSION};
pub use numerics::{spd_solve, symmetric_eigen, Eigen, SymMatrix};
pub use optimizer::{
    auto_sigma_grid, cross_validate, objective, search_sigma, solve_embedding, train, CvGrids,
    SigmaGrid, TraceRow, TrainConfig, TrainTrace,
};

pub use nalgebra::{DMatrix, DVector};
