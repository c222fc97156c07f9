//! Dense symmetric linear algebra: eigendecomposition and positive-definite solves.
//!
//! Everything downstream funnels its linear algebra through these two entry
//! points so that determinism and accuracy contracts live in one place. Both
//! are pure functions; repeated calls on identical inputs return bit-identical
//! results.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance for accepting an input matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A square real matrix stored exactly symmetric.
///
/// Construction rejects inputs whose asymmetry exceeds [`SYMMETRY_TOL`] and
/// symmetrizes the rest as `(A + A')/2`, so 1e-16-level noise from floating
/// point assembly never leaks into the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Build from a square matrix that is symmetric within [`SYMMETRY_TOL`].
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(a, SYMMETRY_TOL)
    }

    /// Build with a caller-chosen asymmetry tolerance.
    pub fn with_tolerance(a: DMatrix<f64>, tolerance: f64) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let mut max_asymmetry = 0.0f64;
        for i in 0..a.nrows() {
            for j in (i + 1)..a.ncols() {
                max_asymmetry = max_asymmetry.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        if max_asymmetry > tolerance {
            return Err(Error::NotSymmetric {
                max_asymmetry,
                tolerance,
            });
        }
        Ok(Self::symmetrize(a))
    }

    /// Symmetrize `(A + A')/2` without an asymmetry check.
    ///
    /// For assembly paths that are symmetric by construction.
    pub fn symmetrize(mut a: DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "symmetrize requires a square matrix");
        for i in 0..a.nrows() {
            for j in (i + 1)..a.ncols() {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        SymMatrix { data: a }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }
}

/// The `d` algebraically smallest eigenpairs of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues in ascending order.
    pub values: DVector<f64>,
    /// Column-orthonormal eigenvectors, column `k` paired with `values[k]`.
    pub vectors: DMatrix<f64>,
}

/// Compute the `d` smallest eigenvalues and eigenvectors of `a`.
///
/// Eigenvalues come back ascending; each eigenvector is sign-normalized so
/// that its largest-magnitude entry is positive (first such index wins on
/// ties), which pins an otherwise arbitrary sign and keeps results
/// reproducible.
pub fn symmetric_eigen(a: &SymMatrix, d: usize) -> Result<Eigen> {
    let n = a.dim();
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!(
            "requested {d} eigenpairs from a {n}x{n} matrix; need 1 <= d <= {n}"
        )));
    }
    let max_iter = 200 * n.max(8);
    let decomp = a
        .as_matrix()
        .clone()
        .try_symmetric_eigen(f64::EPSILON, max_iter)
        .ok_or(Error::EigenDidNotConverge { max_iter })?;

    // Ascending order with index-stable tie breaking.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| decomp.eigenvalues[i].total_cmp(&decomp.eigenvalues[j]).then(i.cmp(&j)));

    let mut values = DVector::zeros(d);
    let mut vectors = DMatrix::zeros(n, d);
    for (k, &idx) in order.iter().take(d).enumerate() {
        values[k] = decomp.eigenvalues[idx];
        let mut col = decomp.eigenvectors.column(idx).clone_owned();
        sign_normalize(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(Eigen { values, vectors })
}

fn sign_normalize(v: &mut DVector<f64>) {
    let mut best = 0usize;
    let mut best_abs = v[0].abs();
    for i in 1..v.len() {
        if v[i].abs() > best_abs {
            best_abs = v[i].abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Solve `M X = B` for symmetric positive definite `M`.
///
/// Cholesky factorization followed by one step of iterative refinement, which
/// keeps the residual within `1e-8 * (1 + ||B||_F)` well past the conditioning
/// where a bare triangular solve starts to drift.
pub fn spd_solve(m: &SymMatrix, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if b.nrows() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "solve with {}x{} system but {}x{} right-hand side",
            m.dim(),
            m.dim(),
            b.nrows(),
            b.ncols()
        )));
    }
    let chol = m
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let mut x = chol.solve(b);
    let residual = b - m.as_matrix() * &x;
    x += chol.solve(&residual);
    Ok(x)
}
