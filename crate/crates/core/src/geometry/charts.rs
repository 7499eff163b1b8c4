//! Ready-made charts used by the scenarios and tests.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::chart::{Chart, Domain};
use crate::error::{invalid, Result};
use crate::linalg::orthonormalize;
use crate::tolerance::FdSteps;

/// Identity chart of `R^d` on `[-half, half]^d`.
pub fn flat(dim: usize, half: f64, steps: FdSteps) -> Result<Chart> {
    Chart::affine("flat", DMatrix::identity(dim, dim), DVector::zeros(dim), Domain::cube(dim, half), steps)
}

/// `u ↦ (u, 0)` in `R^{d+1}`.
pub fn hyperplane(dim: usize, half: f64, steps: FdSteps) -> Result<Chart> {
    Chart::affine(
        "hyperplane",
        DMatrix::identity(dim + 1, dim),
        DVector::zeros(dim + 1),
        Domain::cube(dim, half),
        steps,
    )
}

/// `u ↦ scale · u` on `R^d`.
pub fn scaled(dim: usize, scale: f64, steps: FdSteps) -> Result<Chart> {
    Chart::affine(
        "scaled",
        DMatrix::identity(dim, dim) * scale,
        DVector::zeros(dim),
        Domain::cube(dim, 1.0),
        steps,
    )
}

/// Graph `u ↦ (u, height(u))` in `R^{d+1}` over `[-half, half]^d`.
pub fn graph<F>(name: &str, dim: usize, half: f64, steps: FdSteps, height: F) -> Result<Chart>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
{
    Chart::new(name, dim + 1, Domain::cube(dim, half), steps, move |u| {
        let mut x = DVector::zeros(dim + 1);
        x.rows_mut(0, dim).copy_from(u);
        x[dim] = height(u);
        x
    })
}

/// Orthographic patch of the unit sphere `S^{N-1} ⊂ R^N` around a base point:
/// `u ↦ sqrt(1 - |u|²) p0 + E u`, where the columns of `E` span `p0^⟂` and are
/// oriented so that `det[E | p0] > 0` (the outward normal is positive).
#[derive(Debug, Clone)]
pub struct OrthographicSphere {
    pub chart: Chart,
    pub base_point: DVector<f64>,
    pub complement: DMatrix<f64>,
}

impl OrthographicSphere {
    pub fn new(base_point: &DVector<f64>, radius: f64, steps: FdSteps) -> Result<Self> {
        let n = base_point.len();
        if n < 2 || !(radius > 0.0 && radius < 1.0) {
            return invalid("orthographic patch needs N >= 2 and a radius in (0, 1)");
        }
        let p0 = base_point.normalize();
        let mut family = vec![p0.clone()];
        family.extend((0..n).map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        }));
        let basis = orthonormalize(&family, 1e-8);
        let mut e = DMatrix::zeros(n, n - 1);
        for (c, b) in basis.iter().skip(1).take(n - 1).enumerate() {
            e.set_column(c, b);
        }
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (n, n - 1)).copy_from(&e);
        full.set_column(n - 1, &p0);
        if full.determinant() < 0.0 {
            let flipped = -e.column(0);
            e.set_column(0, &flipped);
        }
        let dim = n - 1;
        let domain = Domain::cube(dim, radius).with_ball(DVector::zeros(dim), radius);
        let (pc, ec) = (p0.clone(), e.clone());
        let chart = Chart::new("orthographic-sphere", n, domain, steps, move |u| {
            let r2 = u.norm_squared();
            &pc * (1.0 - r2).max(0.0).sqrt() + &ec * u
        })?;
        Ok(Self {
            chart,
            base_point: p0,
            complement: e,
        })
    }

    /// Chart parameter of a sphere point in the open hemisphere around the
    /// base point.
    pub fn inverse(&self, p: &DVector<f64>) -> Option<DVector<f64>> {
        if p.dot(&self.base_point) <= 0.0 {
            return None;
        }
        let u = self.complement.transpose() * p;
        self.chart.domain.contains(&u, 0.0).then_some(u)
    }
}

/// Round `S^2` of radius `r` in spherical coordinates `(θ, φ)`.
pub fn spherical_s2(radius: f64, steps: FdSteps) -> Result<Chart> {
    let domain = Domain::boxed(
        DVector::from_vec(vec![0.1, -3.0]),
        DVector::from_vec(vec![std::f64::consts::PI - 0.1, 3.0]),
    );
    Chart::new("spherical-s2", 3, domain, steps, move |u| {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        DVector::from_vec(vec![radius * st * cp, radius * st * sp, radius * ct])
    })
}

/// Ellipsoid `Σ (x_i / a_i)² = 1` in `R^N` near the point `(a_0, 0, …, 0)`,
/// parametrized by the last `N - 1` coordinates.
pub fn ellipsoid_patch(semi_axes: &[f64], half: f64, steps: FdSteps) -> Result<Chart> {
    let n = semi_axes.len();
    let axes: Arc<Vec<f64>> = Arc::new(semi_axes.to_vec());
    Chart::new("ellipsoid", n, Domain::cube(n - 1, half), steps, move |u| {
        let mut x = DVector::zeros(n);
        let mut rest = 0.0;
        for i in 1..n {
            x[i] = u[i - 1];
            rest += (u[i - 1] / axes[i]).powi(2);
        }
        x[0] = axes[0] * (1.0 - rest).max(0.0).sqrt();
        x
    })
}
