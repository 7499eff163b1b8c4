//! The natural almost contact metric 3-structure of an oriented hypersurface
//! in flat `H^{m+1}`, and the checks built on it.
//!
//! With unit normal `ξ` and ambient triple `J_α`, the structure is
//!
//! ```text
//! ξ_α   = -J_α ξ
//! η_α X = g(X, ξ_α)
//! φ_α X = J_α S X + η_β(X) ξ_γ - η_γ(X) ξ_β
//! F_α X = η_α(X) ξ
//! ```
//!
//! where `S` projects onto the horizontal distribution `H = span{ξ_α}^⟂` and
//! `(α, β, γ)` runs over the even permutations of `(1, 2, 3)`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::StructureTriple;
use crate::error::{invalid, GeomError, Result};
use crate::geometry::{ambient_derivative, lie_bracket, sff_in_frame, Chart, Frame};
use crate::linalg::orthonormalize;
use crate::report::{nan_max, CheckReport, ResidualLog};
use crate::sampling::SamplePlan;

/// Even permutations of `(0, 1, 2)`.
pub const EVEN_PERMUTATIONS: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// A hypersurface of `R^{4(m+1)}` given by a chart, oriented by the rule
/// `det[J | ξ] > 0`, together with the ambient quaternionic triple.
#[derive(Debug, Clone)]
pub struct OrientedHypersurface {
    pub chart: Chart,
    pub ambient_triple: StructureTriple,
}

impl OrientedHypersurface {
    pub fn new(chart: Chart, ambient_triple: StructureTriple) -> Result<Self> {
        let n = chart.ambient_dim();
        if ambient_triple.dim() != n {
            return invalid(format!(
                "triple acts on R^{} but the chart embeds in R^{n}",
                ambient_triple.dim()
            ));
        }
        if chart.domain_dim() + 1 != n {
            return invalid("chart is not a hypersurface chart");
        }
        Ok(Self {
            chart,
            ambient_triple,
        })
    }

    /// `m` with ambient `H^{m+1}`.
    pub fn quaternionic_dim(&self) -> usize {
        self.chart.ambient_dim() / 4 - 1
    }

    pub fn normal(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        oriented_normal(&self.chart.frame(u)?)
    }

    /// Induced structure at parameter `u`.
    pub fn structure(&self, u: &DVector<f64>) -> Result<Induced3Structure> {
        induce_3_structure(self, u)
    }
}

/// Unit normal from the cofactors of the Jacobian: `ξ_i = (-1)^{i+N} det J_{(i)}`,
/// which makes `det[J | ξ] = |ξ|² > 0` before normalization.
pub fn oriented_normal(frame: &Frame) -> Result<DVector<f64>> {
    let jac = &frame.jacobian;
    let n = jac.nrows();
    if jac.ncols() + 1 != n {
        return invalid("oriented normal needs a hypersurface Jacobian");
    }
    let xi = DVector::from_fn(n, |i, _| {
        let minor = jac.clone().remove_row(i).determinant();
        if (i + n) % 2 == 1 {
            minor
        } else {
            -minor
        }
    });
    let norm = xi.norm();
    if !(norm > 0.0) {
        return Err(GeomError::InvalidHypersurface("normal vanishes".into()));
    }
    let xi = xi / norm;
    let scale = jac.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if (jac.transpose() * &xi).amax() > 1e-8 * scale {
        return Err(GeomError::InvalidHypersurface("normal is not orthogonal to the tangent space".into()));
    }
    Ok(xi)
}

/// Pointwise almost contact metric 3-structure, all maps as ambient `N × N`
/// matrices acting on embedded tangent vectors.
#[derive(Debug, Clone)]
pub struct Induced3Structure {
    pub point: DVector<f64>,
    pub normal: DVector<f64>,
    /// `Id - ξ ξᵀ`.
    pub tangent_projector: DMatrix<f64>,
    pub xi: [DVector<f64>; 3],
    pub phi: [DMatrix<f64>; 3],
    pub f: [DMatrix<f64>; 3],
    /// `S`, projector onto the horizontal distribution.
    pub horizontal: DMatrix<f64>,
    pub ambient: [DMatrix<f64>; 3],
}

impl Induced3Structure {
    pub fn eta(&self, alpha: usize, x: &DVector<f64>) -> f64 {
        x.dot(&self.xi[alpha])
    }

    /// `Σ ξ_α ξ_αᵀ`, projector onto `V`.
    pub fn vertical_projector(&self) -> DMatrix<f64> {
        self.xi.iter().map(|x| x * x.transpose()).sum()
    }

    /// Orthonormal basis of the horizontal distribution.
    pub fn horizontal_basis(&self) -> Vec<DVector<f64>> {
        let n = self.normal.len();
        let cols: Vec<_> = (0..n).map(|i| self.horizontal.column(i).into_owned()).collect();
        orthonormalize(&cols, 1e-6)
    }
}

/// Builds the structure literally from its defining formulas.
pub fn induce_3_structure(m: &OrientedHypersurface, u: &DVector<f64>) -> Result<Induced3Structure> {
    let frame = m.chart.frame(u)?;
    let normal = oriented_normal(&frame)?;
    let n = normal.len();
    let tangent_projector = DMatrix::identity(n, n) - &normal * normal.transpose();
    let ambient = m.ambient_triple.matrices().clone();
    let xi = [0, 1, 2].map(|a| -(&ambient[a] * &normal));
    let vertical: DMatrix<f64> = xi.iter().map(|x| x * x.transpose()).sum();
    let horizontal = &tangent_projector - vertical;
    let mut phi = [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    for &(a, b, c) in &EVEN_PERMUTATIONS {
        phi[a] = &ambient[a] * &horizontal + &xi[c] * xi[b].transpose() - &xi[b] * xi[c].transpose();
    }
    let f = [0, 1, 2].map(|a| &normal * xi[a].transpose());
    Ok(Induced3Structure {
        point: u.clone(),
        normal,
        tangent_projector,
        xi,
        phi,
        f,
        horizontal,
        ambient,
    })
}

/// Residuals of the almost contact metric 3-structure axioms for one
/// structure and a set of unit tangent vectors.
pub fn ac3_residuals(s: &Induced3Structure, vectors: &[DVector<f64>], sample: usize, log: &mut ResidualLog) {
    let (xi, phi) = (&s.xi, &s.phi);
    for a in 0..3 {
        log.record(sample, "xi_tangent", xi[a].dot(&s.normal).abs());
        log.record(sample, "eta_xi", (s.eta(a, &xi[a]) - 1.0).abs());
        for b in 0..3 {
            if a != b {
                log.record(sample, "eta_cross", s.eta(a, &xi[b]).abs());
            }
        }
    }
    for &(a, b, c) in &EVEN_PERMUTATIONS {
        log.record(sample, "phi_xi", (&phi[a] * &xi[b] - &xi[c]).amax());
        log.record(sample, "phi_xi", (&phi[b] * &xi[a] + &xi[c]).amax());
    }
    for (k, x) in vectors.iter().enumerate() {
        let y = &vectors[(k + 1) % vectors.len()];
        for a in 0..3 {
            let lhs = &phi[a] * (&phi[a] * x);
            let rhs = -x + &xi[a] * s.eta(a, x);
            log.record(sample, "phi_square", (lhs - rhs).amax());
            let g = (&phi[a] * x).dot(&(&phi[a] * y)) - x.dot(y) + s.eta(a, x) * s.eta(a, y);
            log.record(sample, "metric_compatibility", g.abs());
        }
        for &(a, b, c) in &EVEN_PERMUTATIONS {
            log.record(sample, "eta_phi", (s.eta(a, &(&phi[b] * x)) - s.eta(c, x)).abs());
            log.record(sample, "eta_phi", (s.eta(b, &(&phi[a] * x)) + s.eta(c, x)).abs());
            let pab = &phi[a] * (&phi[b] * x) - &xi[a] * s.eta(b, x);
            let pba = -(&phi[b] * (&phi[a] * x)) + &xi[b] * s.eta(a, x);
            let pc = &phi[c] * x;
            log.record(sample, "phi_product", (&pab - &pc).amax());
            log.record(sample, "phi_product", (&pba - &pc).amax());
        }
    }
}

type StructureSample = (Frame, Induced3Structure, Vec<DVector<f64>>);

fn sample_structures(
    m: &OrientedHypersurface,
    plan: &SamplePlan,
) -> Result<Vec<StructureSample>> {
    if plan.points == 0 || plan.vectors < 2 {
        return invalid("need at least one point and two vectors per point");
    }
    let mut sampler = plan.sampler();
    let points = m.chart.sample_points(&mut sampler, plan.points);
    points
        .into_iter()
        .map(|u| {
            let frame = m.chart.frame(&u)?;
            let s = induce_3_structure(m, &u)?;
            let vs = (0..plan.vectors).map(|_| frame.random_tangent(&mut sampler)).collect();
            Ok((frame, s, vs))
        })
        .collect()
}

/// Almost contact structure, 3-structure compatibility and metric axioms.
pub fn check_ac3_axioms(m: &OrientedHypersurface, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    let mut log = ResidualLog::new("ac3_axioms", "almost contact metric 3-structure axioms", tol);
    for (i, (_, s, vs)) in sample_structures(m, plan)?.iter().enumerate() {
        ac3_residuals(s, vs, i, &mut log);
    }
    Ok(log.finish())
}

/// The tangential/normal decomposition `J_α X = φ_α X + F_α X` and its
/// companions: `φ_α` agrees with `J_α` on `H`, and `η_α(X) = g(X, ξ_α)`
/// computed through the chart metric.
pub fn check_decomposition(m: &OrientedHypersurface, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    let mut log = ResidualLog::new(
        "decomposition",
        "tangential/normal decomposition of J_α on the hypersurface",
        tol,
    );
    for (i, (frame, s, vs)) in sample_structures(m, plan)?.iter().enumerate() {
        for x in vs {
            let hx = &s.horizontal * x;
            for a in 0..3 {
                let jx = &s.ambient[a] * x;
                let phix = &s.phi[a] * x;
                let fx = &s.f[a] * x;
                log.record(i, "reconstruction", (&jx - &phix - &fx).amax());
                log.record(i, "phi_tangent", phix.dot(&s.normal).abs());
                log.record(i, "f_normal", (&s.tangent_projector * &fx).amax());
                log.record(i, "horizontal_invariance", (&s.phi[a] * &hx - &s.ambient[a] * &hx).amax());
                let gx = frame.coords(x).dot(&(&frame.metric * frame.coords(&s.xi[a])));
                log.record(i, "eta_metric", (s.eta(a, x) - gx).abs());
            }
        }
    }
    Ok(log.finish())
}

/// Parallelism of `φ_α`, `η_α` and `ξ_α` under the induced Levi-Civita
/// connection. A 3-cosymplectic structure passes.
pub fn check_cosymplectic(m: &OrientedHypersurface, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    let mut log = ResidualLog::new("cosymplectic", "3-cosymplectic: ∇φ_α = 0 and ∇η_α = 0", tol);
    let chart = &m.chart;
    for (i, (frame, s, vs)) in sample_structures(m, plan)?.iter().enumerate() {
        let p = &s.tangent_projector;
        for (k, x) in vs.iter().enumerate() {
            let y = &vs[(k + 1) % vs.len()];
            // columns: φ_α P Y (α = 1..3), P Y, ξ_α (α = 1..3)
            let fields = |v: &DVector<f64>| -> Result<DMatrix<f64>> {
                let t = induce_3_structure(m, v)?;
                let py = &t.tangent_projector * y;
                let mut out = DMatrix::zeros(py.len(), 7);
                for a in 0..3 {
                    out.set_column(a, &(&t.phi[a] * &py));
                    out.set_column(4 + a, &t.xi[a]);
                }
                out.set_column(3, &py);
                Ok(out)
            };
            let scalars = |v: &DVector<f64>| -> Result<DVector<f64>> {
                let t = induce_3_structure(m, v)?;
                let py = &t.tangent_projector * y;
                Ok(DVector::from_fn(3, |a, _| t.eta(a, &py)))
            };
            let d: DMatrix<f64> = ambient_derivative(chart, frame, x, &fields)?;
            let d_eta: DVector<f64> = ambient_derivative(chart, frame, x, &scalars)?;
            let nabla_y = p * d.column(3);
            for a in 0..3 {
                let nabla_phi = p * d.column(a) - &s.phi[a] * &nabla_y;
                let nabla_xi = p * d.column(4 + a);
                let nabla_eta = d_eta[a] - s.eta(a, &nabla_y);
                log.record(i, "nabla_phi", nabla_phi.amax());
                log.record(i, "nabla_eta", nabla_eta.abs());
                log.record(i, "nabla_xi", nabla_xi.norm());
                log.record(i, "eta_xi_consistency", (nabla_eta - y.dot(&nabla_xi)).abs());
            }
        }
    }
    Ok(log.finish())
}

/// Mixed geodesic condition `B(U, X) = 0` for `U ∈ V`, `X ∈ H`, reported
/// beside the integrability of `V` (the part of `[ξ_α, ξ_β]` outside `V`).
///
/// The mixed residual at a point is `max_α sup_{|X|=1, X ∈ H} |B(ξ_α, X)|`,
/// computed exactly over an orthonormal basis of `H` since `B` takes values
/// in the one-dimensional normal space.
pub fn check_mixed_geodesic(m: &OrientedHypersurface, plan: &SamplePlan, tol: f64) -> Result<CheckReport> {
    let mut log = ResidualLog::new(
        "mixed_geodesic",
        "mixed geodesic hypersurface, equivalently V integrable",
        tol,
    );
    for (i, (frame, s, _)) in sample_structures(m, plan)?.iter().enumerate() {
        let (mixed, bracket) = mixed_geodesic_at(m, frame, s)?;
        log.record(i, "mixed", mixed);
        log.record(i, "bracket", bracket);
    }
    Ok(log.finish())
}

/// `(mixed, bracket)` residuals at one point.
pub fn mixed_geodesic_at(m: &OrientedHypersurface, frame: &Frame, s: &Induced3Structure) -> Result<(f64, f64)> {
    let chart = &m.chart;
    let basis = s.horizontal_basis();
    let mut mixed = 0.0f64;
    for a in 0..3 {
        let mut sq = 0.0;
        for e in &basis {
            sq += sff_in_frame(chart, frame, &s.xi[a], e)?.norm_squared();
        }
        mixed = nan_max(mixed, sq.sqrt());
    }
    let off_v = DMatrix::identity(s.normal.len(), s.normal.len()) - s.vertical_projector();
    let mut bracket = 0.0f64;
    for &(a, b, _) in &EVEN_PERMUTATIONS {
        let xa = |v: &DVector<f64>| -> Result<DVector<f64>> { Ok(induce_3_structure(m, v)?.xi[a].clone()) };
        let xb = |v: &DVector<f64>| -> Result<DVector<f64>> { Ok(induce_3_structure(m, v)?.xi[b].clone()) };
        let br = lie_bracket(chart, &s.point, &xa, &xb)?;
        bracket = nan_max(bracket, (&off_v * br).norm());
    }
    Ok((mixed, bracket))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_structure_triple, Convention};
    use crate::geometry::charts::{hyperplane, OrthographicSphere};
    use crate::tolerance::FdSteps;

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn flat(conv: Convention) -> OrientedHypersurface {
        let chart = hyperplane(7, 1.0, FdSteps::DEFAULT).unwrap();
        OrientedHypersurface::new(chart, make_structure_triple(2, conv).unwrap()).unwrap()
    }

    fn sphere(conv: Convention) -> OrientedHypersurface {
        let s = OrthographicSphere::new(&e(8, 0), 0.8, FdSteps::DEFAULT).unwrap();
        OrientedHypersurface::new(s.chart, make_structure_triple(2, conv).unwrap()).unwrap()
    }

    #[test]
    fn hyperplane_reeb_fields() {
        let m = flat(Convention::Left);
        let s = m.structure(&DVector::zeros(7)).unwrap();
        assert!((&s.normal - e(8, 7)).amax() < 1e-12);
        // last quaternion coordinate is k; -i·k = j, -j·k = -i, -k·k = 1
        assert!((&s.xi[0] - e(8, 6)).amax() < 1e-12);
        assert!((&s.xi[1] + e(8, 5)).amax() < 1e-12);
        assert!((&s.xi[2] - e(8, 4)).amax() < 1e-12);
        let s2 = m.structure(&DVector::from_element(7, 0.3)).unwrap();
        assert!((&s2.xi[0] - &s.xi[0]).amax() < 1e-12);

        let r = flat(Convention::Right).structure(&DVector::zeros(7)).unwrap();
        // -k·i... right multiplication: -(k·i) = -j, -(k·k) = 1, -(k·j) = i
        assert!((&r.xi[0] + e(8, 6)).amax() < 1e-12);
        assert!((&r.xi[1] - e(8, 4)).amax() < 1e-12);
        assert!((&r.xi[2] - e(8, 5)).amax() < 1e-12);
    }

    #[test]
    fn sphere_reeb_fields_at_base_point() {
        let s = sphere(Convention::Left).structure(&DVector::zeros(7)).unwrap();
        assert!((&s.normal - e(8, 0)).amax() < 1e-12);
        for a in 0..3 {
            assert!((&s.xi[a] + e(8, a + 1)).amax() < 1e-12);
        }
    }

    #[test]
    fn phi_rotates_reeb_fields() {
        let m = sphere(Convention::Right);
        let plan = SamplePlan::new(8, 4, 1);
        for (_, s, _) in sample_structures(&m, &plan).unwrap() {
            assert!((&s.phi[0] * &s.xi[1] - &s.xi[2]).amax() < 1e-12);
            assert!((&s.phi[0] * &s.xi[2] + &s.xi[1]).amax() < 1e-12);
        }
    }

    #[test]
    fn axioms_hold_on_model_hypersurfaces() {
        let plan = SamplePlan::new(8, 8, 42);
        let r = check_ac3_axioms(&flat(Convention::Left), &plan, 1e-10).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_ac3_axioms(&sphere(Convention::Right), &plan, 1e-8).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn scaled_reeb_field_breaks_normalization() {
        let mut s = sphere(Convention::Right).structure(&DVector::zeros(7)).unwrap();
        s.xi[1] *= 1.1;
        let mut log = ResidualLog::new("ac3_axioms", "", 1e-8);
        let vs = vec![e(8, 1), e(8, 2)];
        ac3_residuals(&s, &vs, 0, &mut log);
        let r = log.finish();
        assert!((r.component("eta_xi").unwrap() - 0.21).abs() < 1e-12);
        assert!(!r.passed());
    }

    #[test]
    fn decomposition_is_exact() {
        let plan = SamplePlan::new(8, 8, 42);
        for m in [flat(Convention::Left), sphere(Convention::Right)] {
            let r = check_decomposition(&m, &plan, 1e-10).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn flat_structure_is_cosymplectic() {
        let r = check_cosymplectic(&flat(Convention::Left), &SamplePlan::new(4, 4, 42), 1e-6).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sphere_structure_is_not_cosymplectic() {
        let r = check_cosymplectic(&sphere(Convention::Right), &SamplePlan::new(4, 4, 42), 1e-4).unwrap();
        assert!(!r.passed());
        assert!(r.component("nabla_xi").unwrap() >= 0.5);
        assert!(r.component("eta_xi_consistency").unwrap() < 1e-4);
    }

    #[test]
    fn sphere_and_hyperplane_are_mixed_geodesic() {
        let plan = SamplePlan::new(4, 2, 42);
        let r = check_mixed_geodesic(&sphere(Convention::Right), &plan, 1e-4).unwrap();
        assert!(r.component("mixed").unwrap() < 1e-6, "{r:?}");
        assert!(r.component("bracket").unwrap() < 1e-4, "{r:?}");
        let r = check_mixed_geodesic(&flat(Convention::Left), &plan, 1e-10).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn mismatched_triple_rejected() {
        let chart = hyperplane(7, 1.0, FdSteps::DEFAULT).unwrap();
        assert!(OrientedHypersurface::new(chart, make_structure_triple(1, Convention::Left).unwrap()).is_err());
    }
}
