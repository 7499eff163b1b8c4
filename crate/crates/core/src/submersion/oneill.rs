//! O'Neill's tensors of a Riemannian submersion,
//!
//! ```text
//! T_E F = h ∇_{vE} vF + v ∇_{vE} hF
//! A_E F = v ∇_{hE} hF + h ∇_{hE} vF
//! ```
//!
//! with `vF`, `hF` extended to fields by projecting the constant ambient
//! vector `F` pointwise. Then `D_X(v(·)F) = (D_X v) F`, so one derivative of
//! the projectors serves every `F`.

use nalgebra::{DMatrix, DVector};

use super::SubmersionDescriptor;
use crate::error::Result;

/// `(D_X v, D_X h)` along one direction.
#[derive(Debug, Clone)]
pub struct SplitDerivative {
    pub vertical: DMatrix<f64>,
    pub horizontal: DMatrix<f64>,
}

pub fn oneill_t(s: &SubmersionDescriptor, u: &DVector<f64>, e: &DVector<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    let sf = s.split(u)?;
    let e = sf.frame.ensure_tangent(e)?;
    let d = s.split_derivative(u, &(&sf.vertical * e))?;
    Ok(&sf.horizontal * (&d.vertical * f) + &sf.vertical * (&d.horizontal * f))
}

pub fn oneill_a(s: &SubmersionDescriptor, u: &DVector<f64>, e: &DVector<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    let sf = s.split(u)?;
    let e = sf.frame.ensure_tangent(e)?;
    let d = s.split_derivative(u, &(&sf.horizontal * e))?;
    Ok(&sf.vertical * (&d.horizontal * f) + &sf.horizontal * (&d.vertical * f))
}

/// `½ v[X̃, Ỹ]` for the horizontal extensions `X̃ = h(·)X`, `Ỹ = h(·)Y`.
pub fn a_bracket(s: &SubmersionDescriptor, u: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let sf = s.split(u)?;
    let (hx, hy) = (&sf.horizontal * x, &sf.horizontal * y);
    let dx = s.split_derivative(u, &hx)?;
    let dy = s.split_derivative(u, &hy)?;
    Ok(&sf.vertical * (&dx.horizontal * y - &dy.horizontal * x) * 0.5)
}
