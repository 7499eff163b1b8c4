//! Central finite differences along a parameter direction.

use std::ops::{Add, Mul, Sub};

use nalgebra::DVector;

/// Values that finite differences can be taken of: scalars, vectors, matrices.
pub trait FdValue: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> FdValue for T where T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// `(f(u + h a) - f(u - h a)) / 2h`.
pub fn central<T, E, F>(f: &F, u: &DVector<f64>, dir: &DVector<f64>, h: f64) -> Result<T, E>
where
    T: FdValue,
    F: Fn(&DVector<f64>) -> Result<T, E>,
{
    let plus = f(&(u + dir * h))?;
    let minus = f(&(u - dir * h))?;
    Ok((plus - minus) * (0.5 / h))
}

/// Central difference with one Richardson step, `(4 D(h/2) - D(h)) / 3`.
/// Truncation error drops from `O(h²)` to `O(h⁴)`.
pub fn richardson<T, E, F>(f: &F, u: &DVector<f64>, dir: &DVector<f64>, h: f64) -> Result<T, E>
where
    T: FdValue,
    F: Fn(&DVector<f64>) -> Result<T, E>,
{
    let coarse = central(f, u, dir, h)?;
    let fine = central(f, u, dir, 0.5 * h)?;
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}

/// Mixed second derivative `∂_a ∂_b f` by polarization, with Richardson
/// extrapolation.
pub fn mixed_second<T, E, F>(
    f: &F,
    u: &DVector<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    h: f64,
) -> Result<T, E>
where
    T: FdValue,
    F: Fn(&DVector<f64>) -> Result<T, E>,
{
    let polar = |h: f64| -> Result<T, E> {
        let s = a + b;
        let d = a - b;
        let pp = f(&(u + &s * h))?;
        let pm = f(&(u + &d * h))?;
        let mp = f(&(u - &d * h))?;
        let mm = f(&(u - &s * h))?;
        Ok((pp - pm - mp + mm) * (0.25 / (h * h)))
    };
    let coarse = polar(h)?;
    let fine = polar(0.5 * h)?;
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}
