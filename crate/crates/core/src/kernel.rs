//! Gaussian RBF kernel matrices with ridge-regularized factorizations.
//!
//! The kernel is `phi(r) = exp(-r^2 / sigma^2)`, exactly as written (no
//! factor of two in the denominator). A [`KernelSystem`] owns the kernel
//! matrix over a set of anchors together with a Cholesky factorization of
//! `Psi + ridge*I`; every solve in the toolkit goes through it, and the
//! quadratic form `tr(Y' Psi^-2 Y)` is evaluated via solves rather than an
//! explicit inverse.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

/// Ridge escalation ladder used when a factorization fails.
pub const RIDGE_LADDER: [f64; 3] = [1e-8, 1e-6, 1e-4];

/// Default ridge for kernel factorizations.
pub const DEFAULT_RIDGE: f64 = 1e-8;

#[inline]
pub(crate) fn gaussian(squared_distance: f64, sigma: f64) -> f64 {
    (-squared_distance / (sigma * sigma)).exp()
}

/// Gaussian kernel matrix between all pairs of rows of `x`.
pub fn kernel_matrix(x: &DMatrix<f64>, sigma: f64) -> Result<SymMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel scale sigma = {sigma} must be positive"
        )));
    }
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        let mut d2 = 0.0;
                        for c in 0..x.ncols() {
                            let d = x[(i, c)] - x[(j, c)];
                            d2 += d * d;
                        }
                        gaussian(d2, sigma)
                    }
                })
                .collect()
        })
        .collect();
    let mut psi = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            psi[(i, j)] = v;
        }
    }
    SymMatrix::new(psi)
}

/// Kernel values of a query point against every anchor row.
pub fn kernel_vector(anchors: &DMatrix<f64>, sigma: f64, query: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(anchors.nrows(), |i, _| {
        let mut d2 = 0.0;
        for c in 0..anchors.ncols() {
            let d = query[c] - anchors[(i, c)];
            d2 += d * d;
        }
        gaussian(d2, sigma)
    })
}

/// Lipschitz constant of the scalar Gaussian kernel: `sqrt(2) e^{-1/2} / sigma`.
///
/// The kernel derivative peaks in magnitude at `r = sigma / sqrt(2)`, which
/// makes this bound tight.
pub fn kernel_lipschitz(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel scale sigma = {sigma} must be positive"
        )));
    }
    Ok(2.0f64.sqrt() * (-0.5f64).exp() / sigma)
}

/// A kernel matrix over fixed anchors with a positive-definite factorization.
///
/// Construction tries the requested ridge first and escalates through
/// [`RIDGE_LADDER`] when the Cholesky factorization fails (duplicate anchors
/// or an overly large scale make `Psi` numerically singular). The ridge that
/// actually succeeded is recorded and travels with every downstream artifact.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    anchors: DMatrix<f64>,
    sigma: f64,
    ridge: f64,
    psi: SymMatrix,
    regularized: DMatrix<f64>,
    factorization: Cholesky<f64, Dyn>,
}

impl KernelSystem {
    /// Factorize `Psi + ridge*I` over the given anchors, escalating the ridge
    /// on failure.
    pub fn new(anchors: &DMatrix<f64>, sigma: f64, ridge: f64) -> Result<Self> {
        if !(ridge >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ridge = {ridge} must be nonnegative"
            )));
        }
        let psi = kernel_matrix(anchors, sigma)?;
        let mut candidates = vec![ridge];
        candidates.extend(RIDGE_LADDER.iter().copied().filter(|&r| r > ridge));
        let mut last = ridge;
        for &candidate in &candidates {
            last = candidate;
            let mut regularized = psi.as_matrix().clone();
            for i in 0..regularized.nrows() {
                regularized[(i, i)] += candidate;
            }
            if let Some(factorization) = regularized.clone().cholesky() {
                return Ok(KernelSystem {
                    anchors: anchors.clone(),
                    sigma,
                    ridge: candidate,
                    psi,
                    regularized,
                    factorization,
                });
            }
        }
        Err(Error::IllConditionedKernel {
            sigma,
            max_ridge: last,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The ridge that the factorization actually used.
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn anchors(&self) -> &DMatrix<f64> {
        &self.anchors
    }

    /// The kernel matrix without the ridge.
    pub fn psi(&self) -> &SymMatrix {
        &self.psi
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    /// Solve `(Psi + ridge*I) X = B` with one refinement pass.
    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if b.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "kernel system of dimension {} but right-hand side has {} rows",
                self.dim(),
                b.nrows()
            )));
        }
        let mut x = self.factorization.solve(b);
        let residual = b - &self.regularized * &x;
        x += self.factorization.solve(&residual);
        Ok(x)
    }

    /// `||(Psi + ridge*I)^{-1} Y||_F^2 = tr(Y' Psi^{-2} Y)`, via solves.
    pub fn quad_form_inv_sq(&self, y: &DMatrix<f64>) -> Result<f64> {
        let z = self.solve(y)?;
        Ok(z.norm_squared())
    }

    /// Dense `(Psi + ridge*I)^{-2}`, bitwise symmetric.
    ///
    /// Needed once per embedding update, where the operator must exist as an
    /// explicit matrix for the eigensolver.
    pub fn inverse_squared(&self) -> SymMatrix {
        let inv = SymMatrix::symmetrize(self.factorization.inverse()).into_matrix();
        // Product of a bitwise-symmetric matrix with itself is bitwise
        // symmetric, so no further cleanup is needed.
        SymMatrix::symmetrize(&inv * &inv)
    }
}
