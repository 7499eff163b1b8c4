use nalgebra::{DMatrix, DVector};

use super::triple::StructureTriple;
use crate::error::Result;
use crate::fd::richardson;
use crate::geometry::{christoffel, MetricField};
use crate::linalg::{flatten, least_squares};

/// A structure triple depending on a point.
pub type TripleField<'a> = dyn Fn(&DVector<f64>) -> Result<StructureTriple> + 'a;

/// Computes `(∇_X J_1, ∇_X J_2, ∇_X J_3)` at a point.
pub trait CovariantDerivative {
    fn derivative(&self, field: &TripleField<'_>, p: &DVector<f64>, x: &DVector<f64>) -> Result<[DMatrix<f64>; 3]>;
}

fn stacked(field: &TripleField<'_>, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    let t = field(p)?;
    let n = t.dim();
    let mut m = DMatrix::zeros(n, 3 * n);
    for a in 0..3 {
        m.view_mut((0, a * n), (n, n)).copy_from(t.get(a));
    }
    Ok(m)
}

fn directional(field: &TripleField<'_>, p: &DVector<f64>, x: &DVector<f64>, step: f64) -> Result<[DMatrix<f64>; 3]> {
    let d = richardson(&|q: &DVector<f64>| stacked(field, q), p, x, step)?;
    let n = d.nrows();
    Ok([0, 1, 2].map(|a| d.view((0, a * n), (n, n)).into_owned()))
}

/// Directional derivative of the matrix entries: the Levi-Civita connection
/// of a flat metric in affine coordinates.
#[derive(Debug, Clone, Copy)]
pub struct FlatDerivative {
    pub step: f64,
}

impl CovariantDerivative for FlatDerivative {
    fn derivative(&self, field: &TripleField<'_>, p: &DVector<f64>, x: &DVector<f64>) -> Result<[DMatrix<f64>; 3]> {
        directional(field, p, x, self.step)
    }
}

/// Levi-Civita connection of a metric given in coordinates:
/// `∇_X J = D_X J + Γ_X J - J Γ_X`.
pub struct ChristoffelDerivative<'a> {
    pub metric: &'a MetricField<'a>,
    pub step: f64,
}

impl CovariantDerivative for ChristoffelDerivative<'_> {
    fn derivative(&self, field: &TripleField<'_>, p: &DVector<f64>, x: &DVector<f64>) -> Result<[DMatrix<f64>; 3]> {
        let flat = directional(field, p, x, self.step)?;
        let gx = christoffel(self.metric, p, self.step)?.contract(x);
        let t = field(p)?;
        Ok([0, 1, 2].map(|a| &flat[a] + &gx * t.get(a) - t.get(a) * &gx))
    }
}

/// Fitted connection forms at one `(point, direction)` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSample {
    pub omega: [f64; 3],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QKFormFit {
    pub samples: Vec<OmegaSample>,
    /// Largest post-fit defect of the quaternionic Kähler condition.
    pub residual: f64,
    pub max_omega: f64,
    /// The condition `∇J_α = Σ ω ∧ J` holds within tolerance.
    pub quaternionic_kaehler: bool,
    /// Additionally every `ω_α` vanishes: each `J_α` is parallel.
    pub hyperkaehler_flag: bool,
}

/// Fits `(ω_1(X), ω_2(X), ω_3(X))` in
///
/// ```text
/// ∇_X J_1 =  ω_3 J_2 - ω_2 J_3
/// ∇_X J_2 = -ω_3 J_1 + ω_1 J_3
/// ∇_X J_3 =  ω_2 J_1 - ω_1 J_2
/// ```
///
/// jointly over all three equations by linear least squares, one fit per
/// sample direction.
pub fn qk_connection_forms(
    field: &TripleField<'_>,
    connection: &dyn CovariantDerivative,
    samples: &[(DVector<f64>, DVector<f64>)],
    tol: f64,
) -> Result<QKFormFit> {
    let mut out = Vec::with_capacity(samples.len());
    for (p, x) in samples {
        let t = field(p)?;
        let nabla = connection.derivative(field, p, x)?;
        let (j1, j2, j3) = (flatten(t.get(0)), flatten(t.get(1)), flatten(t.get(2)));
        let n2 = j1.len();
        let zero = DVector::zeros(n2);
        // columns: coefficients of ω_1, ω_2, ω_3 in the stacked equations
        let cols = [
            [zero.clone(), j3.clone(), -&j2],
            [-&j3, zero.clone(), j1.clone()],
            [j2.clone(), -&j1, zero.clone()],
        ];
        let mut design = DMatrix::zeros(3 * n2, 3);
        for (c, blocks) in cols.iter().enumerate() {
            for (b, block) in blocks.iter().enumerate() {
                design.view_mut((b * n2, c), (n2, 1)).copy_from(block);
            }
        }
        let mut rhs = DVector::zeros(3 * n2);
        for (b, m) in nabla.iter().enumerate() {
            rhs.rows_mut(b * n2, n2).copy_from(&flatten(m));
        }
        let omega = least_squares(&design, &rhs)?;
        let residual = (&design * &omega - &rhs).amax();
        out.push(OmegaSample {
            omega: [omega[0], omega[1], omega[2]],
            residual,
        });
    }
    let residual = out.iter().map(|s| s.residual).fold(0.0, f64::max);
    let max_omega = out
        .iter()
        .flat_map(|s| s.omega.iter().map(|w| w.abs()))
        .fold(0.0, f64::max);
    let quaternionic_kaehler = residual < tol;
    Ok(QKFormFit {
        samples: out,
        residual,
        max_omega,
        quaternionic_kaehler,
        hyperkaehler_flag: quaternionic_kaehler && max_omega < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{axis_rotation, make_structure_triple, so3_generator, so3_rotate, Convention};

    fn origin_samples(n: usize) -> Vec<(DVector<f64>, DVector<f64>)> {
        (0..n)
            .map(|i| {
                let mut x = DVector::zeros(n);
                x[i] = 1.0;
                (DVector::zeros(n), x)
            })
            .collect()
    }

    #[test]
    fn constant_field_is_hyperkaehler() {
        let t = make_structure_triple(2, Convention::Left).unwrap();
        let field = move |_: &DVector<f64>| Ok(t.clone());
        let fit = qk_connection_forms(&field, &FlatDerivative { step: 1e-3 }, &origin_samples(8), 1e-4).unwrap();
        assert!(fit.max_omega < 1e-10 && fit.residual < 1e-10);
        assert!(fit.hyperkaehler_flag);
    }

    #[test]
    fn rotating_field_has_unit_first_form() {
        let t = make_structure_triple(2, Convention::Left).unwrap();
        let mut x = DVector::zeros(8);
        x[2] = 1.0;
        let xf = x.clone();
        let field = move |p: &DVector<f64>| so3_rotate(&t, &axis_rotation(0, p.dot(&xf)), 1e-9);

        // closed form: d/dt exp(t L_1) = L_1 at t = 0, so d/dt J_α = Σ (L_1)_{αβ} J_β
        let base = make_structure_triple(2, Convention::Left).unwrap();
        let l1 = so3_generator(0);
        let closed = [0, 1, 2].map(|a| base.combination([l1[(a, 0)], l1[(a, 1)], l1[(a, 2)]]));
        let fd = FlatDerivative { step: 1e-3 }.derivative(&field, &DVector::zeros(8), &x).unwrap();
        for a in 0..3 {
            assert!((&fd[a] - &closed[a]).amax() < 1e-9);
        }

        let fit = qk_connection_forms(&field, &FlatDerivative { step: 1e-3 }, &[(DVector::zeros(8), x)], 1e-4).unwrap();
        let w = &fit.samples[0].omega;
        assert!((w[0] - 1.0).abs() < 1e-6 && w[1].abs() < 1e-6 && w[2].abs() < 1e-6);
        assert!(fit.residual < 1e-4);
        assert!(fit.quaternionic_kaehler && !fit.hyperkaehler_flag);
    }

    #[test]
    fn symmetric_perturbation_is_not_absorbed() {
        let eps = 1e-2;
        let t = make_structure_triple(1, Convention::Left).unwrap();
        let mut x = DVector::zeros(4);
        x[1] = 1.0;
        let xf = x.clone();
        let sym = DMatrix::from_fn(4, 4, |r, c| if (r + c) % 2 == 0 { 1.0 } else { -1.0 });
        let field = move |p: &DVector<f64>| {
            let s = p.dot(&xf) * eps;
            StructureTriple::from_matrices([0, 1, 2].map(|a| t.get(a) + &sym * s))
        };
        let fit = qk_connection_forms(&field, &FlatDerivative { step: 1e-3 }, &[(DVector::zeros(4), x)], 1e-4).unwrap();
        assert!(fit.residual >= eps / 2.0);
        assert!(!fit.hyperkaehler_flag);
    }
}
