use nalgebra::DVector;

use super::chart::{Chart, Frame};
use super::connection::ambient_derivative;
use crate::error::{invalid, Result};
use crate::fd::mixed_second;

/// Second fundamental form `B(X, Y) = (Id - P) · D_X Y`, a normal vector.
/// Evaluated as the normal part of the mixed second derivative of the
/// embedding along the parameter directions of `X` and `Y`.
pub fn second_fundamental_form(
    c: &Chart,
    u: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let frame = c.frame(u)?;
    let x = frame.ensure_tangent(x)?;
    let y = frame.ensure_tangent(y)?;
    sff_in_frame(c, &frame, &x, &y)
}

pub(crate) fn sff_in_frame(c: &Chart, frame: &Frame, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let a = frame.coords(x);
    let b = frame.coords(y);
    let embed = |v: &DVector<f64>| -> Result<DVector<f64>> { Ok(c.point(v)) };
    let hess: DVector<f64> = mixed_second(&embed, &frame.u, &a, &b, c.steps.step2)?;
    Ok(frame.normal_part(&hess))
}

/// Mean curvature vector: `g`-trace of `B` divided by the dimension.
pub fn mean_curvature(c: &Chart, u: &DVector<f64>) -> Result<DVector<f64>> {
    let frame = c.frame(u)?;
    mean_curvature_in_frame(c, &frame)
}

fn mean_curvature_in_frame(c: &Chart, frame: &Frame) -> Result<DVector<f64>> {
    let basis = frame.tangent_basis();
    let mut h = DVector::zeros(frame.ambient_dim());
    for e in &basis {
        h += sff_in_frame(c, frame, e, e)?;
    }
    Ok(h / basis.len() as f64)
}

/// Shape data at one point, sampled on all pairs of an orthonormal tangent
/// frame.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub point: DVector<f64>,
    /// `(i, j, B(e_i, e_j))` for `i <= j`.
    pub b_samples: Vec<(usize, usize, DVector<f64>)>,
    pub mean_curvature: DVector<f64>,
    /// `max |B(e_i, e_j) - δ_ij H|`.
    pub umbilical_residual: f64,
    /// `max_i |(Id - P) D_{e_i} H|`.
    pub normal_parallel_residual: f64,
    /// `max |B(e_i, e_j) - B(e_j, e_i)|`.
    pub symmetry_residual: f64,
    pub max_b: f64,
}

/// Classification of a submanifold over a set of sample points.
#[derive(Debug, Clone)]
pub struct UmbilicReport {
    pub shapes: Vec<ShapeData>,
    pub max_b: f64,
    pub umbilical_residual: f64,
    pub normal_parallel_residual: f64,
    pub min_mean_curvature: f64,
    pub max_mean_curvature: f64,
    pub totally_geodesic: bool,
    pub totally_umbilical: bool,
    pub extrinsic_sphere: bool,
}

pub const MIN_UMBILIC_POINTS: usize = 8;

pub fn shape_at(c: &Chart, u: &DVector<f64>) -> Result<ShapeData> {
    let frame = c.frame(u)?;
    let basis = frame.tangent_basis();
    let d = basis.len();
    let mut b_samples = Vec::with_capacity(d * (d + 1) / 2);
    let mut symmetry_residual: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            let bij = sff_in_frame(c, &frame, &basis[i], &basis[j])?;
            if i != j {
                let bji = sff_in_frame(c, &frame, &basis[j], &basis[i])?;
                symmetry_residual = symmetry_residual.max((&bij - bji).amax());
            }
            b_samples.push((i, j, bij));
        }
    }
    let mut h = DVector::zeros(frame.ambient_dim());
    for (i, j, b) in &b_samples {
        if i == j {
            h += b;
        }
    }
    h /= d as f64;
    let mut umbilical_residual: f64 = 0.0;
    let mut max_b: f64 = 0.0;
    for (i, j, b) in &b_samples {
        let model = if i == j { h.clone() } else { DVector::zeros(h.len()) };
        umbilical_residual = umbilical_residual.max((b - model).norm());
        max_b = max_b.max(b.norm());
    }
    let h_field = |v: &DVector<f64>| -> Result<DVector<f64>> { mean_curvature_in_frame(c, &c.frame(v)?) };
    let mut normal_parallel_residual: f64 = 0.0;
    for e in &basis {
        let dh: DVector<f64> = ambient_derivative(c, &frame, e, &h_field)?;
        normal_parallel_residual = normal_parallel_residual.max(frame.normal_part(&dh).norm());
    }
    Ok(ShapeData {
        point: u.clone(),
        b_samples,
        mean_curvature: h,
        umbilical_residual,
        normal_parallel_residual,
        symmetry_residual,
        max_b,
    })
}

/// Totally geodesic: `max |B| < tol`. Totally umbilical: `B = g H` within
/// `tol`. Extrinsic sphere: umbilical, `|H| > 10·tol` everywhere and `H`
/// parallel in the normal bundle within `tol`.
pub fn classify_umbilical(c: &Chart, points: &[DVector<f64>], tol: f64) -> Result<UmbilicReport> {
    if points.len() < MIN_UMBILIC_POINTS {
        return invalid(format!(
            "umbilicity classification needs at least {MIN_UMBILIC_POINTS} points, got {}",
            points.len()
        ));
    }
    let shapes = points.iter().map(|u| shape_at(c, u)).collect::<Result<Vec<_>>>()?;
    let max_b = shapes.iter().map(|s| s.max_b).fold(0.0, f64::max);
    let umbilical_residual = shapes.iter().map(|s| s.umbilical_residual).fold(0.0, f64::max);
    let normal_parallel_residual = shapes
        .iter()
        .map(|s| s.normal_parallel_residual)
        .fold(0.0, f64::max);
    let norms: Vec<f64> = shapes.iter().map(|s| s.mean_curvature.norm()).collect();
    let min_mean_curvature = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max_mean_curvature = norms.iter().copied().fold(0.0, f64::max);
    let totally_geodesic = max_b < tol;
    let totally_umbilical = umbilical_residual < tol;
    let extrinsic_sphere =
        totally_umbilical && min_mean_curvature > 10.0 * tol && normal_parallel_residual < tol;
    Ok(UmbilicReport {
        shapes,
        max_b,
        umbilical_residual,
        normal_parallel_residual,
        min_mean_curvature,
        max_mean_curvature,
        totally_geodesic,
        totally_umbilical,
        extrinsic_sphere,
    })
}
