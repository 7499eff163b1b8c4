//! Quaternionic submersions: Riemannian submersions that carry the total
//! quaternionic bundle onto the base one, and the transfer of connection
//! forms `ω'_α(π_* X) = ω_α(X)`.

use nalgebra::{DMatrix, DVector};

use super::SubmersionDescriptor;
use crate::algebra::{qk_connection_forms, ChristoffelDerivative, QKFormFit, StructureTriple, TripleField};
use crate::error::{invalid, Result};
use crate::linalg::{flatten, least_squares};
use crate::report::{nan_max, CheckReport, ResidualLog};
use crate::sampling::SamplePlan;

#[derive(Debug, Clone)]
pub struct QuaternionicSubmersionReport {
    pub report: CheckReport,
    pub total_forms: QKFormFit,
    /// Forms of the base triple fitted to `π_* ∘ J_α` along the section.
    pub base_forms: QKFormFit,
    pub total_hyperkaehler: bool,
    pub base_hyperkaehler: bool,
}

/// Coefficients `c` and residual of `π_* J_α ≈ Σ_β c_{αβ} J'_β π_*`.
fn holomorphic_fit(
    d: &DMatrix<f64>,
    total: &[DMatrix<f64>; 3],
    base: &StructureTriple,
) -> Result<([[f64; 3]; 3], f64)> {
    let cols: Vec<_> = (0..3).map(|b| flatten(&(base.get(b) * d))).collect();
    let design = DMatrix::from_columns(&cols);
    let mut c = [[0.0; 3]; 3];
    let mut residual = 0.0;
    for a in 0..3 {
        let rhs = flatten(&(d * &total[a]));
        let x = least_squares(&design, &rhs)?;
        residual = nan_max(residual, (&design * &x - rhs).amax());
        c[a] = [x[0], x[1], x[2]];
    }
    Ok((c, residual))
}

/// Checks `(σ, σ')`-holomorphy, the Riemannian submersion property, the
/// quaternionic Kähler condition on both sides with the base basis chosen
/// π-related to the total one, and `ω'_α(π_* X) = ω_α(X)`.
///
/// The total chart must be an open subset of its ambient space; both
/// triples act on parameter components.
pub fn check_quaternionic_submersion(
    s: &SubmersionDescriptor,
    total_triple: &TripleField<'_>,
    base_triple: &TripleField<'_>,
    plan: &SamplePlan,
    tol: f64,
) -> Result<QuaternionicSubmersionReport> {
    if s.total.domain_dim() != s.total.ambient_dim() {
        return invalid("quaternionic submersions need an open total chart");
    }
    if plan.points == 0 || plan.vectors < 2 {
        return invalid("need at least one point and two vectors per point");
    }
    let mut log = ResidualLog::new(
        "quaternionic_submersion",
        "quaternionic submersion: (σ,σ')-holomorphic Riemannian submersion, ω'_α(π_*X) = ω_α(X)",
        tol,
    );
    let total_matrices = |u: &DVector<f64>| -> Result<[DMatrix<f64>; 3]> {
        let frame = s.total.frame(u)?;
        let t = total_triple(u)?;
        let to_coords = &frame.metric_inv * frame.jacobian.transpose();
        Ok([0, 1, 2].map(|a| &to_coords * t.get(a) * &frame.jacobian))
    };
    let total_metric = |u: &DVector<f64>| Ok(s.total.frame(u)?.metric);
    let base_metric = |q: &DVector<f64>| s.base_metric_at(q);
    let step = s.total.steps.step2;

    let mut sampler = plan.sampler();
    for (i, u) in s.total.sample_points(&mut sampler, plan.points).iter().enumerate() {
        let q = s.project(u);
        let sf = s.split(u)?;
        let (_, residual) = holomorphic_fit(&sf.differential, &total_matrices(u)?, &base_triple(&q)?)?;
        log.record(i, "holomorphy", residual);
        let g_base = s.base_metric_at(&q)?;
        let hs: Vec<_> = (0..plan.vectors).map(|_| sf.random_horizontal(&mut sampler)).collect();
        for (k, x) in hs.iter().enumerate() {
            for y in [x, &hs[(k + 1) % hs.len()]] {
                let gp = sf.push(x).dot(&(&g_base * sf.push(y)));
                log.record(i, "isometry", (gp - x.dot(y)).abs());
            }
        }
    }

    // ω-transfer along the section, where the fitted base basis is anchored
    let fitted_base = |q: &DVector<f64>| -> Result<StructureTriple> {
        let u = s.section(q)?;
        let sf = s.split(&u)?;
        let base = base_triple(q)?;
        let (c, _) = holomorphic_fit(&sf.differential, &total_matrices(&u)?, &base)?;
        StructureTriple::from_matrices([0, 1, 2].map(|a| base.combination(c[a])))
    };
    let total_field = |u: &DVector<f64>| -> Result<StructureTriple> { StructureTriple::from_matrices(total_matrices(u)?) };
    let nabla_total = ChristoffelDerivative {
        metric: &total_metric,
        step,
    };
    let nabla_base = ChristoffelDerivative {
        metric: &base_metric,
        step,
    };
    let mut total_samples = Vec::new();
    let mut base_samples = Vec::new();
    let mut owners = Vec::new();
    for (i, q) in s.base.sample_points(&mut sampler, plan.points).iter().enumerate() {
        let u = s.section(q)?;
        let sf = s.split(&u)?;
        for _ in 0..plan.vectors {
            let x = sf.random_horizontal(&mut sampler);
            total_samples.push((u.clone(), sf.frame.coords(&x)));
            base_samples.push((q.clone(), sf.push(&x)));
            owners.push(i);
        }
    }
    let total_forms = qk_connection_forms(&total_field, &nabla_total, &total_samples, tol)?;
    let base_forms = qk_connection_forms(&fitted_base, &nabla_base, &base_samples, tol)?;
    for (k, &i) in owners.iter().enumerate() {
        let (w, wp) = (&total_forms.samples[k], &base_forms.samples[k]);
        log.record(i, "total_qk_defect", w.residual);
        log.record(i, "base_qk_defect", wp.residual);
        let transfer = (0..3).map(|a| (w.omega[a] - wp.omega[a]).abs()).fold(0.0, nan_max);
        log.record(i, "omega_transfer", transfer);
    }
    Ok(QuaternionicSubmersionReport {
        report: log.finish(),
        total_hyperkaehler: total_forms.hyperkaehler_flag,
        base_hyperkaehler: base_forms.hyperkaehler_flag,
        total_forms,
        base_forms,
    })
}

