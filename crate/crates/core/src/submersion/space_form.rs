//! Fitting the quaternionic space form curvature
//!
//! ```text
//! R(X,Y)Z = c/4 { g(Z,Y)X - g(X,Z)Y
//!           + Σ_α [ g(Z,J_αY)J_αX - g(Z,J_αX)J_αY + 2g(X,J_αY)J_αZ ] }
//! ```
//!
//! to sampled curvature tensors.

use nalgebra::{DMatrix, DVector};

use crate::algebra::StructureTriple;
use crate::error::{invalid, Result};
use crate::geometry::CurvatureSample;
use crate::sampling::Sampler;
use crate::tolerance::FdSteps;

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceFormFit {
    pub c: f64,
    /// `‖R - c R₁‖ / ‖R‖` over all samples and components.
    pub relative_residual: f64,
    /// Curvature below ten times the noise floor; `c` is then reported as 0.
    pub flat: bool,
    pub max_curvature: f64,
    pub noise_floor: f64,
    pub quaternionic_sectional: Vec<f64>,
    /// `(max - min) / |mean|` of the quaternionic sectional curvatures, or
    /// `max - min` on a flat base.
    pub spread: f64,
}

/// Round-off level of a Riemann tensor built from a metric that is itself
/// a first difference, differentiated twice more.
pub fn curvature_noise_floor(steps: FdSteps) -> f64 {
    f64::EPSILON / (steps.step1 * steps.step2 * steps.step2)
}

/// Components `R₁^l_{ijk}` of the model tensor at `c = 1`, in the flat
/// order of [`CurvatureSample::components`].
pub fn model_curvature(metric: &DMatrix<f64>, triple: &StructureTriple) -> Vec<f64> {
    let d = metric.nrows();
    let gj: Vec<DMatrix<f64>> = (0..3).map(|a| metric * triple.get(a)).collect();
    let mut out = vec![0.0; d.pow(4)];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut r = 0.0;
                    if l == i {
                        r += metric[(k, j)];
                    }
                    if l == j {
                        r -= metric[(i, k)];
                    }
                    for a in 0..3 {
                        let ja = triple.get(a);
                        r += gj[a][(k, j)] * ja[(l, i)] - gj[a][(k, i)] * ja[(l, j)] + 2.0 * gj[a][(i, j)] * ja[(l, k)];
                    }
                    out[((l * d + i) * d + j) * d + k] = 0.25 * r;
                }
            }
        }
    }
    out
}

/// Least-squares `c` over every component of every sample, plus the
/// sectional curvatures of `planes_per_point` random half-quaternionic
/// planes `span{X, Σ b_α J_α X}` at each sample.
pub fn space_form_fit(
    samples: &[CurvatureSample],
    triples: &[StructureTriple],
    sampler: &mut Sampler,
    planes_per_point: usize,
    noise_floor: f64,
) -> Result<SpaceFormFit> {
    if samples.is_empty() || samples.len() != triples.len() {
        return invalid("need one triple per curvature sample");
    }
    for (s, t) in samples.iter().zip(triples) {
        if s.dim() % 4 != 0 {
            return invalid(format!("dimension {} is not a multiple of 4", s.dim()));
        }
        if t.dim() != s.dim() {
            return invalid("triple and curvature dimensions differ");
        }
    }
    let (mut rr, mut rm, mut mm) = (0.0, 0.0, 0.0);
    let mut max_curvature: f64 = 0.0;
    let models: Vec<_> = samples.iter().zip(triples).map(|(s, t)| model_curvature(&s.metric, t)).collect();
    for (s, m) in samples.iter().zip(&models) {
        for (r, r1) in s.components().iter().zip(m) {
            rr += r * r;
            rm += r * r1;
            mm += r1 * r1;
            max_curvature = max_curvature.max(r.abs());
        }
    }
    let flat = max_curvature < 10.0 * noise_floor;
    let c = if flat { 0.0 } else { rm / mm };
    let relative_residual = if flat {
        0.0
    } else {
        let mut err = 0.0;
        for (s, m) in samples.iter().zip(&models) {
            for (r, r1) in s.components().iter().zip(m) {
                err += (r - c * r1).powi(2);
            }
        }
        (err / rr).sqrt()
    };

    let mut quaternionic_sectional = Vec::new();
    for (s, t) in samples.iter().zip(triples) {
        for _ in 0..planes_per_point {
            let x: DVector<f64> = sampler.unit_vector(s.dim());
            let b = sampler.unit_vector(3);
            let y = t.combination([b[0], b[1], b[2]]) * &x;
            quaternionic_sectional.push(s.sectional(&x, &y));
        }
    }
    let (lo, hi, sum) = quaternionic_sectional
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, sum), &k| (lo.min(k), hi.max(k), sum + k));
    let spread = if quaternionic_sectional.is_empty() {
        0.0
    } else if flat {
        hi - lo
    } else {
        (hi - lo) / (sum / quaternionic_sectional.len() as f64).abs()
    };
    Ok(SpaceFormFit {
        c,
        relative_residual,
        flat,
        max_curvature,
        noise_floor,
        quaternionic_sectional,
        spread,
    })
}
