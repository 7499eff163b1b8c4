//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Modified Gram–Schmidt. Vectors whose residual norm drops below `floor`
/// are discarded.
pub fn orthonormalize(vectors: &[DVector<f64>], floor: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
        let n = w.norm();
        if n > floor {
            basis.push(w / n);
        }
    }
    basis
}

/// Orthogonal projector onto the span of an orthonormal family.
pub fn projector(basis: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(dim, dim);
    for b in basis {
        p += b * b.transpose();
    }
    p
}

/// Least-squares solution of `design · x ≈ rhs` through an SVD.
pub fn least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax.max(1e-300) {
        return Err(GeomError::NumericalFailure(
            "rank-deficient least-squares design".into(),
        ));
    }
    svd.solve(rhs, 0.0)
        .map_err(|e| GeomError::NumericalFailure(e.to_string()))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| GeomError::NumericalFailure("matrix is not positive definite".into()))
}

/// Flattens a matrix column-major into a vector.
pub fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
