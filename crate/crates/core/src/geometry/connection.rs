use nalgebra::{DMatrix, DVector};

use super::chart::{Chart, Frame};
use crate::error::Result;
use crate::fd::{richardson, FdValue};

/// Ambient-valued vector field over chart parameters.
pub type VectorField<'a> = dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + 'a;

/// Pullback of the flat ambient metric.
pub fn induced_metric(c: &Chart, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(c.frame(u)?.metric)
}

/// Orthogonal projector of `R^N` onto the tangent space at `u`.
pub fn tangent_projector(c: &Chart, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(c.frame(u)?.projector)
}

/// Flat derivative `D_X F` of any field over parameters, along the tangent
/// vector `x` at `frame.u`.
pub fn ambient_derivative<T, F>(c: &Chart, frame: &Frame, x: &DVector<f64>, field: &F) -> Result<T>
where
    T: FdValue,
    F: Fn(&DVector<f64>) -> Result<T>,
{
    let dir = frame.coords(x);
    richardson(field, &frame.u, &dir, c.steps.step2)
}

/// Levi-Civita connection of the induced metric, `∇_X Y = P · D_X Y`.
pub fn levi_civita(
    c: &Chart,
    u: &DVector<f64>,
    x_field: &VectorField<'_>,
    y_field: &VectorField<'_>,
) -> Result<DVector<f64>> {
    let frame = c.frame(u)?;
    let x = frame.ensure_tangent(&x_field(u)?)?;
    frame.ensure_tangent(&y_field(u)?)?;
    let dy = ambient_derivative(c, &frame, &x, &|v: &DVector<f64>| y_field(v))?;
    Ok(frame.tangent_part(&dy))
}

/// Lie bracket `[X, Y] = D_X Y - D_Y X` in ambient coordinates.
pub fn lie_bracket(
    c: &Chart,
    u: &DVector<f64>,
    x_field: &VectorField<'_>,
    y_field: &VectorField<'_>,
) -> Result<DVector<f64>> {
    let frame = c.frame(u)?;
    let x = x_field(u)?;
    let y = y_field(u)?;
    let dy = ambient_derivative(c, &frame, &x, &|v: &DVector<f64>| y_field(v))?;
    let dx = ambient_derivative(c, &frame, &y, &|v: &DVector<f64>| x_field(v))?;
    Ok(dy - dx)
}

/// Field `v ↦ P(v) w` extending the tangent part of a fixed ambient vector.
pub fn projected_field(c: &Chart, w: DVector<f64>) -> impl Fn(&DVector<f64>) -> Result<DVector<f64>> + '_ {
    move |v| Ok(c.frame(v)?.tangent_part(&w))
}

/// Coordinate field `∂_i` pushed into the ambient space.
pub fn coordinate_field(c: &Chart, i: usize) -> impl Fn(&DVector<f64>) -> Result<DVector<f64>> + '_ {
    move |v| Ok(c.jacobian(v)?.column(i).into_owned())
}
