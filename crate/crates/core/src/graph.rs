//! Neighborhood graph and class-aware weight structure.
//!
//! Training starts from a k-nearest-neighbor relation over the samples. Edges
//! between same-class neighbors carry Gaussian weights `exp(-||xi - xj||^2 / beta)`
//! and define the within-class Laplacian; every different-class pair (edge or
//! not) carries weight one and defines the between-class Laplacian.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

/// How a directed k-NN relation becomes undirected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetrization {
    /// Edge when either endpoint lists the other among its k nearest.
    #[default]
    Union,
    /// Edge only when both do.
    Mutual,
}

/// The neighborhood structure and Laplacians for one training set.
#[derive(Debug, Clone)]
pub struct ClassGraph {
    /// Undirected edges as `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Within-class Gaussian weights, zero off the edge set.
    pub within: DMatrix<f64>,
    /// Binary between-class weights over all different-class pairs.
    pub between: DMatrix<f64>,
    pub lap_within: SymMatrix,
    pub lap_between: SymMatrix,
    pub k: usize,
    /// Gaussian width for the within-class weights, in squared-distance units.
    pub beta: f64,
}

impl ClassGraph {
    /// Build the full structure from features and labels.
    pub fn build(
        x: &DMatrix<f64>,
        labels: &[usize],
        k: usize,
        symmetrization: Symmetrization,
    ) -> Result<Self> {
        if labels.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows but {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        let edges = knn_edges(x, k, symmetrization)?;
        let beta = heuristic_beta(x, &edges);
        let (within, between) = class_weights(x, labels, &edges, beta)?;
        let lap_within = laplacian(&within)?;
        let lap_between = laplacian(&between)?;
        Ok(ClassGraph {
            edges,
            within,
            between,
            lap_within,
            lap_between,
            k,
            beta,
        })
    }
}

fn squared_distance(x: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let mut acc = 0.0;
    for c in 0..x.ncols() {
        let d = x[(i, c)] - x[(j, c)];
        acc += d * d;
    }
    acc
}

/// Undirected k-nearest-neighbor relation under Euclidean distance.
///
/// Distance ties break toward the lower index, which keeps the relation
/// deterministic even with duplicate points. The relation is irreflexive and
/// symmetric.
pub fn knn_edges(
    x: &DMatrix<f64>,
    k: usize,
    symmetrization: Symmetrization,
) -> Result<Vec<(usize, usize)>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "k-NN graph needs at least two samples".into(),
        ));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} out of range; need 1 <= k <= {}",
            n - 1
        )));
    }

    // Each row's k nearest, ties toward the lower index.
    let neighbor_lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut candidates: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(x, i, j), j))
                .collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            candidates.truncate(k);
            candidates.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    let mut directed = vec![false; n * n];
    for (i, list) in neighbor_lists.iter().enumerate() {
        for &j in list {
            directed[i * n + j] = true;
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let keep = match symmetrization {
                Symmetrization::Union => directed[i * n + j] || directed[j * n + i],
                Symmetrization::Mutual => directed[i * n + j] && directed[j * n + i],
            };
            if keep {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

/// Data-driven Gaussian width: the mean squared length over all edges, with a
/// fallback to one when every connected pair coincides.
pub fn heuristic_beta(x: &DMatrix<f64>, edges: &[(usize, usize)]) -> f64 {
    if edges.is_empty() {
        return 1.0;
    }
    let total: f64 = edges.iter().map(|&(i, j)| squared_distance(x, i, j)).sum();
    let beta = total / edges.len() as f64;
    if beta > 0.0 {
        beta
    } else {
        1.0
    }
}

/// Within-class and between-class weight matrices.
///
/// `within[(i, j)] = exp(-||xi - xj||^2 / beta)` on same-class edges, zero
/// elsewhere. `between[(i, j)] = 1` for every different-class pair, edge or
/// not. Both have zero diagonal.
pub fn class_weights(
    x: &DMatrix<f64>,
    labels: &[usize],
    edges: &[(usize, usize)],
    beta: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let n = x.nrows();
    let mut within = DMatrix::zeros(n, n);
    for &(i, j) in edges {
        if labels[i] == labels[j] {
            let w = (-squared_distance(x, i, j) / beta).exp();
            within[(i, j)] = w;
            within[(j, i)] = w;
        }
    }
    let mut between = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] != labels[j] {
                between[(i, j)] = 1.0;
                between[(j, i)] = 1.0;
            }
        }
    }
    Ok((within, between))
}

/// Unnormalized graph Laplacian `L = D - W` of a symmetric nonnegative weight
/// matrix with zero diagonal.
pub fn laplacian(w: &DMatrix<f64>) -> Result<SymMatrix> {
    if w.nrows() != w.ncols() {
        return Err(Error::NotSquare {
            rows: w.nrows(),
            cols: w.ncols(),
        });
    }
    for i in 0..w.nrows() {
        if w[(i, i)] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "weight matrix has nonzero diagonal entry at ({i}, {i})"
            )));
        }
    }
    let n = w.nrows();
    let mut lap = -w.clone();
    for i in 0..n {
        let degree: f64 = w.row(i).sum();
        lap[(i, i)] = degree;
    }
    SymMatrix::new(lap)
}
