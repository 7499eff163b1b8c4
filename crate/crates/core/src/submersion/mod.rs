//! Riemannian submersions from chart-parametrized manifolds onto base
//! parameter domains: differentials, the vertical/horizontal split,
//! horizontal lifts, O'Neill tensors, structure pushdown and the checks for
//! QR 3-submersions and quaternionic submersions.

mod oneill;
mod qr3;
mod quaternionic;
mod space_form;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, GeomError, Result};
use crate::fd::{central, richardson};
use crate::geometry::{Chart, Domain, Frame, SampleRegion};
use crate::linalg::{singular_values, spd_inverse};
use crate::sampling::Sampler;
use crate::tolerance::RANK_FLOOR;

pub use oneill::{a_bracket, oneill_a, oneill_t, SplitDerivative};
pub use qr3::{
    basic_covariant, basic_field_residual, check_base_hyperkaehler, check_qr3_submersion, fiber_compatibility, prop43_residual,
    push_structure, pushed_triple_field, FiberCompatibility, PushedTriple,
};
pub use quaternionic::{check_quaternionic_submersion, QuaternionicSubmersionReport};
pub use space_form::{curvature_noise_floor, model_curvature, space_form_fit, SpaceFormFit};

/// Map between parameter spaces.
pub type ParamMap = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
/// Moves a total-space parameter along its fiber by a group parameter.
pub type FiberMove = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync>;
/// Metric components over base parameters.
pub type MetricFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Parameter domain of the base manifold.
#[derive(Debug, Clone)]
pub struct BaseChart {
    pub name: String,
    pub domain: Domain,
    pub sample_region: SampleRegion,
}

impl BaseChart {
    pub fn new(name: &str, domain: Domain) -> Self {
        Self {
            name: name.to_string(),
            sample_region: SampleRegion::shrunk(&domain, 0.75),
            domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn sample_points(&self, sampler: &mut Sampler, n: usize) -> Vec<DVector<f64>> {
        let r = &self.sample_region;
        (0..n)
            .map(|_| sampler.point_in(&r.center, &r.half_widths, r.radius))
            .collect()
    }
}

/// How the base metric is obtained.
#[derive(Clone)]
pub enum BaseMetric {
    /// `g'(X', Y') = g(lift X', lift Y')` evaluated at the section point.
    Pushed,
    Explicit(MetricFn),
}

impl fmt::Debug for BaseMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseMetric::Pushed => f.write_str("Pushed"),
            BaseMetric::Explicit(_) => f.write_str("Explicit"),
        }
    }
}

/// A submersion `π: M → M'` in charts. `projection` maps total parameters to
/// base parameters and `section` is a right inverse of it.
#[derive(Clone)]
pub struct SubmersionDescriptor {
    pub total: Chart,
    pub base: BaseChart,
    pub base_metric: BaseMetric,
    pub fiber_dim: usize,
    projection: ParamMap,
    section: ParamMap,
    fiber_move: Option<FiberMove>,
    linear_projection: Option<DMatrix<f64>>,
}

impl fmt::Debug for SubmersionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubmersionDescriptor")
            .field("total", &self.total)
            .field("base", &self.base)
            .field("base_metric", &self.base_metric)
            .field("fiber_dim", &self.fiber_dim)
            .finish()
    }
}

/// Differential and the vertical/horizontal split at one total-space point.
/// `v` and `h` are ambient `N × N` projectors.
#[derive(Debug, Clone)]
pub struct SplitFrame {
    pub frame: Frame,
    /// `d' × d` matrix of `∂π/∂u`.
    pub differential: DMatrix<f64>,
    /// `G⁻¹ Dᵀ (D G⁻¹ Dᵀ)⁻¹`: base components to lifted parameter components.
    pub lift: DMatrix<f64>,
    pub vertical: DMatrix<f64>,
    pub horizontal: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

impl SplitFrame {
    /// `π_* X` for an ambient tangent vector.
    pub fn push(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.differential * self.frame.coords(x)
    }

    /// Horizontal lift of base components.
    pub fn lift(&self, x: &DVector<f64>) -> DVector<f64> {
        self.frame.push(&(&self.lift * x))
    }

    /// `d' × N` matrix of `π_*` on ambient tangent vectors.
    pub fn push_matrix(&self) -> DMatrix<f64> {
        &self.differential * &self.frame.metric_inv * self.frame.jacobian.transpose()
    }

    /// `N × d'` matrix of the horizontal lift.
    pub fn lift_matrix(&self) -> DMatrix<f64> {
        &self.frame.jacobian * &self.lift
    }

    /// `(D G⁻¹ Dᵀ)⁻¹`, the pushed base metric at this point.
    pub fn pushed_metric(&self) -> Result<DMatrix<f64>> {
        let m = &self.differential * &self.frame.metric_inv * self.differential.transpose();
        spd_inverse(&m).map_err(|_| GeomError::NumericalFailure("pushed metric is singular".into()))
    }

    pub fn random_horizontal(&self, sampler: &mut Sampler) -> DVector<f64> {
        unit_in_range(&self.horizontal, sampler)
    }

    pub fn random_vertical(&self, sampler: &mut Sampler) -> DVector<f64> {
        unit_in_range(&self.vertical, sampler)
    }
}

fn unit_in_range(p: &DMatrix<f64>, sampler: &mut Sampler) -> DVector<f64> {
    loop {
        let v = p * sampler.unit_vector(p.nrows());
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

impl SubmersionDescriptor {
    pub fn new(
        total: Chart,
        base: BaseChart,
        projection: ParamMap,
        section: ParamMap,
        base_metric: BaseMetric,
    ) -> Result<Self> {
        let (d, dp) = (total.domain_dim(), base.dim());
        if dp == 0 || dp > d {
            return invalid(format!("cannot submerse dimension {d} onto dimension {dp}"));
        }
        let q0 = base.domain.center();
        let u0 = section(&q0);
        if u0.len() != d || projection(&u0).len() != dp {
            return invalid("projection and section dimensions do not match the charts");
        }
        Ok(Self {
            fiber_dim: d - dp,
            total,
            base,
            base_metric,
            projection,
            section,
            fiber_move: None,
            linear_projection: None,
        })
    }

    pub fn with_fiber_move(mut self, f: FiberMove) -> Self {
        self.fiber_move = Some(f);
        self
    }

    /// Declares `π` linear with matrix `p`, used as the exact differential.
    pub fn with_linear_projection(mut self, p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() != self.base.dim() || p.ncols() != self.total.domain_dim() {
            return invalid("linear projection has the wrong shape");
        }
        self.linear_projection = Some(p);
        Ok(self)
    }

    pub fn with_base_metric(mut self, m: BaseMetric) -> Self {
        self.base_metric = m;
        self
    }

    pub fn project(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.projection)(u)
    }

    /// Section point over `q`, required to be interior to the total chart.
    pub fn section(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let u = (self.section)(q);
        self.total.check_interior(&u)?;
        Ok(u)
    }

    /// Moves `u` along its fiber; errors if no fiber action is attached.
    pub fn fiber_move(&self, u: &DVector<f64>, s: &DVector<f64>) -> Result<DVector<f64>> {
        let f = self
            .fiber_move
            .as_ref()
            .ok_or_else(|| GeomError::InvalidArgument("submersion has no fiber action".into()))?;
        let out = f(u, s)?;
        self.total.check_interior(&out)?;
        Ok(out)
    }

    /// `|π(σ(q)) - q|`.
    pub fn section_residual(&self, q: &DVector<f64>) -> Result<f64> {
        Ok((self.project(&self.section(q)?) - q).amax())
    }

    /// `∂π/∂u` by central differences with `step1`.
    pub fn differential_matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.total.check_interior(u)?;
        if let Some(p) = &self.linear_projection {
            return Ok(p.clone());
        }
        let (d, dp) = (self.total.domain_dim(), self.base.dim());
        let f = |v: &DVector<f64>| -> Result<DVector<f64>> { Ok(self.project(v)) };
        let mut out = DMatrix::zeros(dp, d);
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            out.set_column(i, &central(&f, u, &e, self.total.steps.step1)?);
        }
        Ok(out)
    }

    /// `π_* X` for a tangent vector `x` at `u`.
    pub fn differential(&self, u: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        let frame = self.total.frame(u)?;
        let x = frame.ensure_tangent(x)?;
        Ok(self.differential_matrix(u)? * frame.coords(&x))
    }

    /// Differential plus vertical and horizontal projectors. Errors with a
    /// structure error unless `Ker π_*` has dimension `fiber_dim`.
    pub fn split(&self, u: &DVector<f64>) -> Result<SplitFrame> {
        let frame = self.total.frame(u)?;
        let differential = self.differential_matrix(u)?;
        let sv = singular_values(&differential);
        let top = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > RANK_FLOOR * top.max(1e-300)).count();
        let kernel = self.total.domain_dim() - rank;
        if kernel != self.fiber_dim {
            return Err(GeomError::Structure(format!(
                "kernel of the differential has dimension {kernel}, expected {}",
                self.fiber_dim
            )));
        }
        let gi_dt = &frame.metric_inv * differential.transpose();
        let m = &differential * &gi_dt;
        let m_inv = spd_inverse(&m).map_err(|_| GeomError::NumericalFailure("D G⁻¹ Dᵀ is singular".into()))?;
        let lift = &gi_dt * m_inv;
        let hor = &frame.jacobian * &lift * &differential * &frame.metric_inv * frame.jacobian.transpose();
        let horizontal = (&hor + hor.transpose()) * 0.5;
        let vertical = &frame.projector - &horizontal;
        Ok(SplitFrame {
            frame,
            differential,
            lift,
            vertical,
            horizontal,
            singular_values: sv,
        })
    }

    /// `(v, h)` at `u`.
    pub fn vertical_horizontal_split(&self, u: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let s = self.split(u)?;
        Ok((s.vertical, s.horizontal))
    }

    /// Unique horizontal `X` at `u` with `π_* X = x_base`; `u` must lie over `q`.
    pub fn horizontal_lift(&self, q: &DVector<f64>, x_base: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let off = (self.project(u) - q).amax();
        if off > 1e-8 {
            return invalid(format!("point lies {off:.3e} off the fiber over q"));
        }
        Ok(self.split(u)?.lift(x_base))
    }

    /// Base metric components at `q`.
    pub fn base_metric_at(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        match &self.base_metric {
            BaseMetric::Pushed => self.split(&self.section(q)?)?.pushed_metric(),
            BaseMetric::Explicit(g) => Ok(g(q)),
        }
    }

    /// Derivative of the split projectors along the ambient tangent `x` at `u`.
    pub fn split_derivative(&self, u: &DVector<f64>, x: &DVector<f64>) -> Result<SplitDerivative> {
        let frame = self.total.frame(u)?;
        let n = self.total.ambient_dim();
        let stacked = |v: &DVector<f64>| -> Result<DMatrix<f64>> {
            let s = self.split(v)?;
            let mut m = DMatrix::zeros(n, 2 * n);
            m.view_mut((0, 0), (n, n)).copy_from(&s.vertical);
            m.view_mut((0, n), (n, n)).copy_from(&s.horizontal);
            Ok(m)
        };
        let d = richardson(&stacked, u, &frame.coords(x), self.total.steps.step2)?;
        Ok(SplitDerivative {
            vertical: d.view((0, 0), (n, n)).into_owned(),
            horizontal: d.view((0, n), (n, n)).into_owned(),
        })
    }
}

#[cfg(test)]
mod tests;
