//! QR 3-submersions: pushing the induced structure down to the base, the
//! SO(3) freedom along fibers, and the defining checks.

use nalgebra::{DMatrix, DVector, Matrix3};

use super::{SplitFrame, SubmersionDescriptor};
use crate::algebra::{qk_connection_forms, ChristoffelDerivative, StructureTriple};
use crate::error::{invalid, GeomError, Result};
use crate::geometry::ambient_derivative;
use crate::hypersurface::{mixed_geodesic_at, Induced3Structure, OrientedHypersurface};
use crate::linalg::{flatten, least_squares, singular_values};
use crate::report::{nan_max, CheckReport, ResidualLog};
use crate::sampling::SamplePlan;

/// Base triple `J'_α = π_* ∘ φ_α ∘ lift` obtained from one fiber point.
#[derive(Debug, Clone)]
pub struct PushedTriple {
    pub base_point: DVector<f64>,
    pub j_prime: StructureTriple,
    pub source_point: DVector<f64>,
    /// Largest failure of `φ_α` to preserve the horizontal and vertical spaces.
    pub invariance_residual: f64,
}

/// Rotation relating the triples pushed from two points of one fiber,
/// `J'^{(2)}_α = Σ_β c_{αβ} J'^{(1)}_β`.
#[derive(Debug, Clone)]
pub struct FiberCompatibility {
    pub c: Matrix3<f64>,
    pub fit_residual: f64,
    /// `max |CᵀC - Id|`.
    pub orthogonality: f64,
    pub det: f64,
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn check_same_manifold(s: &SubmersionDescriptor, hyp: &OrientedHypersurface) -> Result<()> {
    if s.total.ambient_dim() != hyp.chart.ambient_dim() || s.total.domain_dim() != hyp.chart.domain_dim() {
        return invalid("submersion and hypersurface live on different charts");
    }
    Ok(())
}

/// `max_α max(‖v φ_α h‖, ‖h φ_α v‖)`: zero iff every `φ_α` preserves both
/// the horizontal and the vertical distribution.
pub fn prop43_residual(sf: &SplitFrame, st: &Induced3Structure) -> f64 {
    st.phi.iter().fold(0.0, |acc, phi| {
        let vh = op_norm(&(&sf.vertical * phi * &sf.horizontal));
        let hv = op_norm(&(&sf.horizontal * phi * &sf.vertical));
        nan_max(acc, nan_max(vh, hv))
    })
}

fn push_at(s: &SubmersionDescriptor, sf: &SplitFrame, st: &Induced3Structure) -> Result<PushedTriple> {
    let (pm, lm) = (sf.push_matrix(), sf.lift_matrix());
    let j = [0, 1, 2].map(|a| &pm * &st.phi[a] * &lm);
    Ok(PushedTriple {
        base_point: s.project(&sf.frame.u),
        j_prime: StructureTriple::from_matrices(j)?,
        source_point: sf.frame.u.clone(),
        invariance_residual: prop43_residual(sf, st),
    })
}

/// Pushes the induced structure at `u` down to the base. Errors when `φ_α`
/// fails to preserve `H` or `V` there by more than `tol`.
pub fn push_structure(
    s: &SubmersionDescriptor,
    hyp: &OrientedHypersurface,
    u: &DVector<f64>,
    tol: f64,
) -> Result<PushedTriple> {
    check_same_manifold(s, hyp)?;
    let pushed = push_at(s, &s.split(u)?, &hyp.structure(u)?)?;
    if !(pushed.invariance_residual < tol) {
        return Err(GeomError::Structure(format!(
            "φ_α does not preserve the horizontal distribution (residual {:.3e})",
            pushed.invariance_residual
        )));
    }
    Ok(pushed)
}

/// Base triple field `q ↦ J'` pushed from the section point over `q`.
pub fn pushed_triple_field<'a>(
    s: &'a SubmersionDescriptor,
    hyp: &'a OrientedHypersurface,
) -> impl Fn(&DVector<f64>) -> Result<StructureTriple> + 'a {
    move |q| {
        let u = s.section(q)?;
        Ok(push_at(s, &s.split(&u)?, &hyp.structure(&u)?)?.j_prime)
    }
}

fn fit_rotation(reference: &StructureTriple, other: &StructureTriple) -> Result<FiberCompatibility> {
    let cols: Vec<_> = (0..3).map(|b| flatten(reference.get(b))).collect();
    let design = DMatrix::from_columns(&cols);
    let mut c = Matrix3::zeros();
    let mut fit_residual = 0.0;
    for a in 0..3 {
        let rhs = flatten(other.get(a));
        let x = least_squares(&design, &rhs)?;
        fit_residual = nan_max(fit_residual, (&design * &x - rhs).amax());
        for b in 0..3 {
            c[(a, b)] = x[b];
        }
    }
    Ok(FiberCompatibility {
        orthogonality: (c.transpose() * c - Matrix3::identity()).amax(),
        det: c.determinant(),
        c,
        fit_residual,
    })
}

/// Compares the triples pushed from two points over `q`. A fit residual
/// above `tol` means the pushdown does not define a quaternionic bundle.
pub fn fiber_compatibility(
    s: &SubmersionDescriptor,
    hyp: &OrientedHypersurface,
    q: &DVector<f64>,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
    tol: f64,
) -> Result<FiberCompatibility> {
    check_same_manifold(s, hyp)?;
    for u in [u1, u2] {
        let off = (s.project(u) - q).amax();
        if off > 1e-8 {
            return invalid(format!("point lies {off:.3e} off the fiber over q"));
        }
    }
    let j1 = push_at(s, &s.split(u1)?, &hyp.structure(u1)?)?.j_prime;
    let j2 = push_at(s, &s.split(u2)?, &hyp.structure(u2)?)?.j_prime;
    let fit = fit_rotation(&j1, &j2)?;
    if !(fit.fit_residual < tol) {
        return Err(GeomError::Structure(format!(
            "pushed triples along a fiber do not span the same bundle (residual {:.3e})",
            fit.fit_residual
        )));
    }
    Ok(fit)
}

/// Verifies that `π` is a QR 3-submersion at sampled points: `Ker π_* = V`,
/// `π_* φ_α = J'_α π_*` against the triple pushed from the section point
/// (rotated by the fitted `C`), isometry on horizontal vectors, the mixed
/// geodesic hypothesis, and invariance of `H` and `V` under `φ_α`.
pub fn check_qr3_submersion(
    s: &SubmersionDescriptor,
    hyp: &OrientedHypersurface,
    plan: &SamplePlan,
    tol: f64,
) -> Result<CheckReport> {
    check_same_manifold(s, hyp)?;
    if plan.points == 0 || plan.vectors < 2 {
        return invalid("need at least one point and two vectors per point");
    }
    let mut log = ResidualLog::new(
        "qr3_submersion",
        "QR 3-submersion: Ker π_* = V and π_* φ_α = J'_α π_*",
        tol,
    );
    let mut sampler = plan.sampler();
    for (i, u) in s.total.sample_points(&mut sampler, plan.points).iter().enumerate() {
        let q = s.project(u);
        let sf = s.split(u)?;
        let st = hyp.structure(u)?;
        log.record(i, "kernel", (&sf.vertical - st.vertical_projector()).amax());

        let here = push_at(s, &sf, &st)?;
        let u_ref = s.section(&q)?;
        let reference = push_at(s, &s.split(&u_ref)?, &hyp.structure(&u_ref)?)?;
        let fit = fit_rotation(&reference.j_prime, &here.j_prime)?;
        log.record(i, "sigma_fit", fit.fit_residual);
        log.record(i, "so3", nan_max(fit.orthogonality, (fit.det - 1.0).abs()));
        log.record(i, "invariance", here.invariance_residual);

        let rotated: Vec<_> = (0..3)
            .map(|a| reference.j_prime.combination([fit.c[(a, 0)], fit.c[(a, 1)], fit.c[(a, 2)]]))
            .collect();
        let g_base = s.base_metric_at(&q)?;
        let xs: Vec<_> = (0..plan.vectors).map(|_| sf.frame.random_tangent(&mut sampler)).collect();
        let hs: Vec<_> = (0..plan.vectors).map(|_| sf.random_horizontal(&mut sampler)).collect();
        for (k, x) in xs.iter().enumerate() {
            let px = sf.push(x);
            for a in 0..3 {
                let lhs = sf.push(&(&st.phi[a] * x));
                log.record(i, "intertwining", (lhs - &rotated[a] * &px).amax());
            }
            let (hx, hy) = (&hs[k], &hs[(k + 1) % hs.len()]);
            for y in [hx, hy] {
                let gp = sf.push(hx).dot(&(&g_base * sf.push(y)));
                log.record(i, "isometry", (gp - hx.dot(y)).abs());
            }
        }
        let (mixed, bracket) = mixed_geodesic_at(hyp, &sf.frame, &st)?;
        log.record(i, "mixed_geodesic", mixed);
        log.record(i, "vertical_bracket", bracket);
    }
    Ok(log.finish())
}

/// Connection forms of the pushed base triple under the base Levi-Civita
/// connection. Passes when every `ω'_α` and every `∇'J'_α` vanishes, i.e. the
/// base is locally hyper-Kähler.
pub fn check_base_hyperkaehler(
    s: &SubmersionDescriptor,
    hyp: &OrientedHypersurface,
    plan: &SamplePlan,
    tol: f64,
) -> Result<CheckReport> {
    check_same_manifold(s, hyp)?;
    let mut log = ResidualLog::new(
        "base_hyperkaehler",
        "base of a QR 3-submersion from a 3-cosymplectic hypersurface is locally hyper-Kähler",
        tol,
    );
    let field = pushed_triple_field(s, hyp);
    let metric = |q: &DVector<f64>| s.base_metric_at(q);
    let nabla = ChristoffelDerivative {
        metric: &metric,
        step: s.total.steps.step2,
    };
    let mut sampler = plan.sampler();
    let dp = s.base.dim();
    for (i, q) in s.base.sample_points(&mut sampler, plan.points).iter().enumerate() {
        let samples: Vec<_> = (0..plan.vectors.max(1))
            .map(|_| (q.clone(), sampler.unit_vector(dp)))
            .collect();
        let fit = qk_connection_forms(&field, &nabla, &samples, tol)?;
        log.record(i, "qk_defect", fit.residual);
        log.record(i, "omega_prime", fit.max_omega);
        for (p, x) in &samples {
            let d = crate::algebra::CovariantDerivative::derivative(&nabla, &field, p, x)?;
            let worst = d.iter().map(|m| m.amax()).fold(0.0, nan_max);
            log.record(i, "nabla_j_prime", worst);
        }
    }
    Ok(log.finish())
}

/// `π_*(h∇_X̃ Ỹ)` at `u` for the basic lifts `X̃`, `Ỹ` of the constant base
/// fields `x`, `y`.
pub fn basic_covariant(s: &SubmersionDescriptor, x: &DVector<f64>, y: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
    let sf = s.split(u)?;
    let lift_y = |w: &DVector<f64>| -> Result<DVector<f64>> { Ok(s.split(w)?.lift(y)) };
    let dy: DVector<f64> = ambient_derivative(&s.total, &sf.frame, &sf.lift(x), &lift_y)?;
    Ok(sf.push(&(&sf.horizontal * dy)))
}

/// `|π_*(h∇_X̃ Ỹ)(u1) - π_*(h∇_X̃ Ỹ)(u2)|` for two points of one fiber.
pub fn basic_field_residual(
    s: &SubmersionDescriptor,
    x: &DVector<f64>,
    y: &DVector<f64>,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
) -> Result<f64> {
    Ok((basic_covariant(s, x, y, u1)? - basic_covariant(s, x, y, u2)?).amax())
}
