//! Alternating optimization of the embedding and kernel scale.
//!
//! One training iteration fixes the kernel scale and recomputes the embedding
//! as the bottom eigenvectors of `Lw - mu1*Lb + mu2*(Psi + ridge*I)^{-2}`,
//! then fixes the embedding and grid-searches the scale to minimize
//! `mu2 * tr(Y' Psi^{-2} Y) + mu3 / sigma^2`. Both steps are restricted
//! global minimizations of the same objective
//!
//! ```text
//! tr(Y' Lw Y) - mu1 tr(Y' Lb Y) + mu2 tr(Y' Psi^{-2} Y) + mu3 / sigma^2
//! ```
//!
//! so the recorded per-iteration objective never increases. The loop stops on
//! relative stabilization, and the interpolator coefficients are solved once
//! at the end.
//!
//! [`cross_validate`] tunes `mu1`, `mu2`, `mu3` sequentially, one parameter
//! at a time, scoring candidates by mean validation misclassification over
//! repeated stratified splits.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::{ClassGraph, Symmetrization};
use crate::kernel::{KernelSystem, DEFAULT_RIDGE};
use crate::model::{EmbeddingModel, Hyperparams};
use crate::numerics::{symmetric_eigen, SymMatrix};

/// Number of points in the automatic kernel-scale grid.
pub const SIGMA_GRID_POINTS: usize = 40;

/// Kernel-scale search grid: data-driven or explicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SigmaGrid {
    /// Log-spaced points between the 1st and 99th percentile of pairwise
    /// training distances.
    Auto,
    Explicit(Vec<f64>),
}

impl Default for SigmaGrid {
    fn default() -> Self {
        SigmaGrid::Auto
    }
}

/// Everything the training loop needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Embedding dimension.
    pub dim: usize,
    /// Weight of the between-class separation term.
    pub mu1: f64,
    /// Weight of the coefficient-norm (interpolator regularity) term.
    pub mu2: f64,
    /// Weight of the kernel-scale term.
    pub mu3: f64,
    /// Neighbor count for the graph.
    pub k: usize,
    pub sigma_grid: SigmaGrid,
    /// Initial kernel scale; defaults to the median pairwise distance. Always
    /// snapped to the nearest grid point.
    pub sigma_init: Option<f64>,
    pub max_iter: usize,
    /// Stop when `|obj_t - obj_{t-1}| / (1 + |obj_{t-1}|)` falls below this.
    pub rel_tol: f64,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 2,
            mu1: 500.0,
            mu2: 5e-4,
            mu3: 2.0,
            k: 5,
            sigma_grid: SigmaGrid::Auto,
            sigma_init: None,
            max_iter: 50,
            rel_tol: 1e-6,
            ridge: DEFAULT_RIDGE,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self, ds: &LabeledDataset) -> Result<()> {
        let n = ds.num_samples();
        if self.dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be positive".into()));
        }
        if self.dim > n {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension {} exceeds the number of training samples {n}",
                self.dim
            )));
        }
        if !(self.mu1 > 0.0 && self.mu2 > 0.0 && self.mu3 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu1, mu2, mu3 must be positive (got {}, {}, {})",
                self.mu1, self.mu2, self.mu3
            )));
        }
        if self.k == 0 || self.k >= n {
            return Err(Error::InvalidParameter(format!(
                "k = {} out of range; need 1 <= k <= {}",
                self.k,
                n.saturating_sub(1)
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be positive".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::InvalidParameter("ridge must be nonnegative".into()));
        }
        if let Some(s) = self.sigma_init {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter(format!("sigma_init = {s} must be positive")));
            }
        }
        if let SigmaGrid::Explicit(grid) = &self.sigma_grid {
            if grid.is_empty() {
                return Err(Error::InvalidParameter("sigma grid must be nonempty".into()));
            }
            if grid.iter().any(|&s| !(s > 0.0)) {
                return Err(Error::InvalidParameter("sigma grid values must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One accepted training iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Full objective value after both alternating steps.
    pub objective: f64,
    pub sigma: f64,
    /// `tr(Y' Lw Y)`
    pub term_lw: f64,
    /// `tr(Y' Lb Y)` (unweighted; enters the objective with factor `-mu1`).
    pub term_lb: f64,
    /// `tr(Y' Psi^{-2} Y)` (enters with factor `mu2`).
    pub term_psi: f64,
    /// `mu3 / sigma^2`
    pub term_sigma: f64,
}

/// Per-iteration convergence record.
#[derive(Debug, Clone, Default)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
}

impl TrainTrace {
    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }
}

fn pairwise_distances(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d2 = 0.0;
            for c in 0..x.ncols() {
                let d = x[(i, c)] - x[(j, c)];
                d2 += d * d;
            }
            out.push(d2.sqrt());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Nearest-rank percentile of an ascending-sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let len = sorted.len();
    let rank = ((p / 100.0) * len as f64).ceil() as usize;
    sorted[rank.clamp(1, len) - 1]
}

fn grid_from_sorted_distances(sorted: &[f64]) -> Result<Vec<f64>> {
    let mut lo = percentile(sorted, 1.0);
    let hi = percentile(sorted, 99.0);
    if lo <= 0.0 {
        lo = match sorted.iter().find(|&&d| d > 0.0) {
            Some(&d) => d,
            None => {
                return Err(Error::InvalidDataset(
                    "all training points are identical; no kernel scale is meaningful".into(),
                ))
            }
        };
    }
    if hi <= lo {
        return Ok(vec![lo]);
    }
    let ratio = hi / lo;
    let denom = (SIGMA_GRID_POINTS - 1) as f64;
    Ok((0..SIGMA_GRID_POINTS)
        .map(|i| lo * ratio.powf(i as f64 / denom))
        .collect())
}

/// Data-driven kernel-scale grid: [`SIGMA_GRID_POINTS`] log-spaced points
/// between the 1st and 99th percentile of pairwise distances.
pub fn auto_sigma_grid(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.nrows() < 2 {
        return Err(Error::InvalidDataset(
            "need at least two samples to derive a sigma grid".into(),
        ));
    }
    grid_from_sorted_distances(&pairwise_distances(x))
}

fn snap_to_grid(value: f64, grid: &[f64]) -> f64 {
    let mut best = grid[0];
    let mut best_gap = (grid[0] - value).abs();
    for &g in &grid[1..] {
        let gap = (g - value).abs();
        if gap < best_gap {
            best_gap = gap;
            best = g;
        }
    }
    best
}

fn trace_quad(l: &SymMatrix, y: &DMatrix<f64>) -> f64 {
    (l.as_matrix() * y).dot(y)
}

/// The symmetric operator whose bottom eigenvectors give the embedding:
/// `Lw - mu1*Lb + mu2*(Psi + ridge*I)^{-2}`.
pub fn embedding_operator(
    lap_within: &SymMatrix,
    lap_between: &SymMatrix,
    ks: &KernelSystem,
    mu1: f64,
    mu2: f64,
) -> Result<SymMatrix> {
    let n = ks.dim();
    if lap_within.dim() != n || lap_between.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "Laplacians of dimension {} and {} against a kernel system of dimension {n}",
            lap_within.dim(),
            lap_between.dim()
        )));
    }
    let mut a = lap_within.as_matrix() - lap_between.as_matrix() * mu1;
    if mu2 != 0.0 {
        a += ks.inverse_squared().into_matrix() * mu2;
    }
    SymMatrix::new(a)
}

/// The full training objective at a given embedding and kernel system.
///
/// Expects `Y' Y = I` (for trained iterates this holds by construction); the
/// formula itself is evaluated as written either way.
pub fn objective(
    y: &DMatrix<f64>,
    ks: &KernelSystem,
    lap_within: &SymMatrix,
    lap_between: &SymMatrix,
    cfg: &TrainConfig,
) -> Result<f64> {
    let n = ks.dim();
    if y.nrows() != n || lap_within.dim() != n || lap_between.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "objective over {n} anchors but Y has {} rows (Laplacians {} / {})",
            y.nrows(),
            lap_within.dim(),
            lap_between.dim()
        )));
    }
    let term_psi = ks.quad_form_inv_sq(y)?;
    Ok(trace_quad(lap_within, y) - cfg.mu1 * trace_quad(lap_between, y)
        + cfg.mu2 * term_psi
        + cfg.mu3 / (ks.sigma() * ks.sigma()))
}

/// Embedding update: bottom-`d` eigenvectors of the [`embedding_operator`].
pub fn solve_embedding(
    lap_within: &SymMatrix,
    lap_between: &SymMatrix,
    ks: &KernelSystem,
    mu1: f64,
    mu2: f64,
    d: usize,
) -> Result<DMatrix<f64>> {
    let a = embedding_operator(lap_within, lap_between, ks, mu1, mu2)?;
    Ok(symmetric_eigen(&a, d)?.vectors)
}

/// Scale update: evaluate `mu2 * tr(Y' Psi^{-2} Y) + mu3 / sigma^2` at every
/// grid point and return the minimizer (ties break toward the smaller scale;
/// grid points whose factorization fails score infinity).
pub fn search_sigma(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    sigma_grid: &[f64],
    mu2: f64,
    mu3: f64,
    ridge: f64,
) -> Result<f64> {
    if sigma_grid.is_empty() {
        return Err(Error::InvalidParameter("sigma grid must be nonempty".into()));
    }
    if sigma_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidParameter("sigma grid values must be positive".into()));
    }
    if y.nrows() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "Y has {} rows but there are {} anchors",
            y.nrows(),
            x.nrows()
        )));
    }
    let scores: Vec<f64> = sigma_grid
        .par_iter()
        .map(|&sigma| match KernelSystem::new(x, sigma, ridge) {
            Ok(ks) => match ks.quad_form_inv_sq(y) {
                Ok(q) => mu2 * q + mu3 / (sigma * sigma),
                Err(_) => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        })
        .collect();
    let mut best_idx = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best_idx] {
            best_idx = i;
        }
    }
    if !scores[best_idx].is_finite() {
        return Err(Error::SigmaSearchFailed);
    }
    Ok(sigma_grid[best_idx])
}

fn sanitize_grid(grid: &[f64]) -> Vec<f64> {
    let mut out = grid.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Train the embedding and its interpolator by alternating minimization.
///
/// Runs the scale-then-embedding alternation until the objective stabilizes
/// (relative change below `rel_tol`) or `max_iter` rounds, records every
/// accepted iteration in the trace, and finally solves
/// `(Psi + ridge*I) C = Y` for the interpolator coefficients.
///
/// Exact arithmetic guarantees the objective never increases; if floating
/// point noise ever produces an increase, the update is rejected and the loop
/// stops at the previous iterate, keeping the recorded trace monotone.
pub fn train(ds: &LabeledDataset, cfg: &TrainConfig) -> Result<(EmbeddingModel, TrainTrace)> {
    cfg.validate(ds)?;
    let x = ds.features();
    let distances = pairwise_distances(x);
    match distances.last() {
        Some(&max) if max > 0.0 => {}
        _ => {
            return Err(Error::InvalidDataset(
                "degenerate dataset: all training points are identical".into(),
            ))
        }
    }
    let grid = match &cfg.sigma_grid {
        SigmaGrid::Auto => grid_from_sorted_distances(&distances)?,
        SigmaGrid::Explicit(g) => sanitize_grid(g),
    };
    let sigma_seed = cfg.sigma_init.unwrap_or_else(|| percentile(&distances, 50.0));
    let sigma0 = snap_to_grid(sigma_seed, &grid);

    let graph = ClassGraph::build(x, ds.labels(), cfg.k, Symmetrization::Union)?;
    let mut system = KernelSystem::new(x, sigma0, cfg.ridge)?;
    let mut trace = TrainTrace::default();
    let mut accepted: Option<(DMatrix<f64>, f64)> = None;
    let mut previous = f64::INFINITY;

    for iteration in 1..=cfg.max_iter {
        let y = solve_embedding(
            &graph.lap_within,
            &graph.lap_between,
            &system,
            cfg.mu1,
            cfg.mu2,
            cfg.dim,
        )?;
        let sigma = search_sigma(&y, x, &grid, cfg.mu2, cfg.mu3, cfg.ridge)?;
        let next = KernelSystem::new(x, sigma, cfg.ridge)?;
        let term_lw = trace_quad(&graph.lap_within, &y);
        let term_lb = trace_quad(&graph.lap_between, &y);
        let term_psi = next.quad_form_inv_sq(&y)?;
        let term_sigma = cfg.mu3 / (sigma * sigma);
        let objective = term_lw - cfg.mu1 * term_lb + cfg.mu2 * term_psi + term_sigma;
        if !objective.is_finite() {
            return Err(Error::InvalidDataset(format!(
                "objective became non-finite at iteration {iteration}"
            )));
        }
        if objective > previous {
            // Stabilized: the analytic steps cannot increase the objective,
            // so an increase is floating-point noise. Keep the previous state.
            break;
        }
        trace.rows.push(TraceRow {
            iteration,
            objective,
            sigma,
            term_lw,
            term_lb,
            term_psi,
            term_sigma,
        });
        let relative_change = (objective - previous).abs() / (1.0 + previous.abs());
        accepted = Some((y, sigma));
        system = next;
        previous = objective;
        if relative_change < cfg.rel_tol {
            break;
        }
    }

    let (embedding, sigma) = accepted.expect("the first iteration is always accepted");
    let final_system = KernelSystem::new(x, sigma, cfg.ridge)?;
    let coefficients = final_system.solve(&embedding)?;
    let model = EmbeddingModel::new(
        x.clone(),
        embedding,
        coefficients,
        sigma,
        final_system.ridge(),
        ds.labels().to_vec(),
        Hyperparams {
            mu1: cfg.mu1,
            mu2: cfg.mu2,
            mu3: cfg.mu3,
            k: cfg.k,
            beta: graph.beta,
        },
        None,
    )?;
    Ok((model, trace))
}

/// Candidate grids for sequential cross-validation of the objective weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvGrids {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub mu3: Vec<f64>,
}

impl Default for CvGrids {
    /// Typical ranges: `mu1` in `[100, 1000]`, `mu2` in `[1e-4, 1e-3]`,
    /// `mu3` in `[1, 5]`.
    fn default() -> Self {
        CvGrids {
            mu1: vec![100.0, 300.0, 1000.0],
            mu2: vec![1e-4, 3e-4, 1e-3],
            mu3: vec![1.0, 2.0, 5.0],
        }
    }
}

/// Fraction of each class kept for training inside a validation fold.
const CV_TRAIN_FRACTION: f64 = 0.7;

fn stratified_fraction_split(
    ds: &LabeledDataset,
    rng: &mut ChaCha8Rng,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let mut train_rows = Vec::new();
    let mut val_rows = Vec::new();
    for class in 0..ds.num_classes() {
        let mut members: Vec<usize> = (0..ds.num_samples())
            .filter(|&i| ds.labels()[i] == class)
            .collect();
        if members.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "class {class} has a single sample; validation split impossible"
            )));
        }
        members.shuffle(rng);
        let take = ((CV_TRAIN_FRACTION * members.len() as f64).floor() as usize)
            .clamp(1, members.len() - 1);
        train_rows.extend_from_slice(&members[..take]);
        val_rows.extend_from_slice(&members[take..]);
    }
    train_rows.sort_unstable();
    val_rows.sort_unstable();
    Ok((ds.select(&train_rows)?, ds.select(&val_rows)?))
}

/// Tune `mu1`, `mu2`, `mu3` sequentially.
///
/// For each parameter in turn the other two stay fixed; every candidate is
/// scored by its mean misclassification rate over `folds` stratified
/// train/validation splits (the same splits for every candidate of that
/// parameter), and the lowest mean wins, ties toward the smaller value.
pub fn cross_validate(
    ds: &LabeledDataset,
    base_cfg: &TrainConfig,
    grids: &CvGrids,
    folds: usize,
    seed: u64,
) -> Result<TrainConfig> {
    if folds == 0 {
        return Err(Error::InvalidParameter("folds must be positive".into()));
    }
    for (name, grid) in [("mu1", &grids.mu1), ("mu2", &grids.mu2), ("mu3", &grids.mu3)] {
        if grid.is_empty() {
            return Err(Error::InvalidParameter(format!("{name} grid must be nonempty")));
        }
        if grid.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidParameter(format!("{name} grid values must be positive")));
        }
    }
    if let Some((class, &count)) = ds.class_counts().iter().enumerate().find(|(_, &c)| c < 2) {
        return Err(Error::InvalidDataset(format!(
            "class {class} has {count} sample(s); validation split impossible"
        )));
    }

    let setters: [(&[f64], fn(&mut TrainConfig, f64)); 3] = [
        (&grids.mu1, |c, v| c.mu1 = v),
        (&grids.mu2, |c, v| c.mu2 = v),
        (&grids.mu3, |c, v| c.mu3 = v),
    ];

    let mut cfg = base_cfg.clone();
    for (stage, (grid, set)) in setters.into_iter().enumerate() {
        let candidates = sanitize_grid(grid);
        // One RNG per stage; the folds it generates are shared by every
        // candidate so the comparison is paired.
        let mut stage_rng =
            ChaCha8Rng::seed_from_u64(seed ^ (stage as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut fold_seeds = Vec::with_capacity(folds);
        for _ in 0..folds {
            fold_seeds.push(stage_rng.next_u64());
        }
        let splits: Vec<(LabeledDataset, LabeledDataset)> = fold_seeds
            .iter()
            .map(|&s| stratified_fraction_split(ds, &mut ChaCha8Rng::seed_from_u64(s)))
            .collect::<Result<_>>()?;

        let jobs: Vec<(usize, usize)> = (0..candidates.len())
            .flat_map(|c| (0..folds).map(move |f| (c, f)))
            .collect();
        let errors: Vec<f64> = jobs
            .par_iter()
            .map(|&(c, f)| {
                let mut candidate_cfg = cfg.clone();
                set(&mut candidate_cfg, candidates[c]);
                let (tr, va) = &splits[f];
                match train(tr, &candidate_cfg)
                    .and_then(|(model, _)| crate::classify::evaluate(&model, va))
                {
                    Ok(report) => report.error_rate,
                    Err(_) => f64::INFINITY,
                }
            })
            .collect();

        let mut best = (f64::INFINITY, f64::NAN);
        for (c, &candidate) in candidates.iter().enumerate() {
            let mean: f64 =
                (0..folds).map(|f| errors[c * folds + f]).sum::<f64>() / folds as f64;
            if mean < best.0 {
                best = (mean, candidate);
            }
        }
        if !best.1.is_finite() {
            return Err(Error::InvalidParameter(
                "cross-validation failed: every candidate configuration failed to train".into(),
            ));
        }
        set(&mut cfg, best.1);
    }
    Ok(cfg)
}
