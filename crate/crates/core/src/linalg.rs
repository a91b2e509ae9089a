//! Thin wrappers over the dense faer kernels used throughout the crate.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::C64;

pub fn column(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn column_to_vec(m: &Mat<C64>) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

pub fn matvec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    let n = m.nrows();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for j in 0..m.ncols() {
        let vj = v[j];
        if vj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * vj;
        }
    }
    out
}

/// Maximum absolute column sum.
pub fn norm1(m: &Mat<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Right eigenvectors, their inverse, and the 1-norm condition number.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: Mat<C64>,
    pub inverse: Mat<C64>,
    pub condition: f64,
}

pub fn eigen(m: &Mat<C64>) -> Result<Eigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::Usage("eigendecomposition needs a square matrix".into()));
    }
    let e = m
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
    let values: Vec<C64> = e.S().column_vector().iter().copied().collect();
    let vectors = e.U().to_owned();
    let inverse = vectors.partial_piv_lu().inverse();
    let condition = norm1(&vectors) * norm1(&inverse);
    if values.iter().any(|v| !v.is_finite()) || !condition.is_finite() {
        return Err(Error::Numerical("eigendecomposition produced non-finite output".into()));
    }
    Ok(Eigen {
        values,
        vectors,
        inverse,
        condition,
    })
}

/// Solves `m x = b` by partial-pivoting LU.
pub fn solve(m: &Mat<C64>, b: &[C64]) -> Vec<C64> {
    let lu = m.partial_piv_lu();
    column_to_vec(&lu.solve(&column(b)))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    let mut v = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}
