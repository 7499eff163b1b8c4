use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::linalg::{orthonormalize, spd_inverse};
use crate::sampling::Sampler;
use crate::tolerance::{FdSteps, RANK_FLOOR, TANGENCY_REL, TANGENCY_REPROJECT_FACTOR};

pub type EmbeddingFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Parameter domain: an open box, optionally intersected with a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub ball: Option<(DVector<f64>, f64)>,
}

impl Domain {
    pub fn boxed(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        Self {
            lower,
            upper,
            ball: None,
        }
    }

    /// `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Self {
        Self::boxed(DVector::from_element(dim, -half), DVector::from_element(dim, half))
    }

    pub fn with_ball(mut self, center: DVector<f64>, radius: f64) -> Self {
        self.ball = Some((center, radius));
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> DVector<f64> {
        match &self.ball {
            Some((c, _)) => c.clone(),
            None => (&self.lower + &self.upper) * 0.5,
        }
    }

    pub fn half_widths(&self) -> DVector<f64> {
        (&self.upper - &self.lower) * 0.5
    }

    /// Strictly inside with at least `margin` to spare in every direction.
    pub fn contains(&self, u: &DVector<f64>, margin: f64) -> bool {
        if u.len() != self.dim() || u.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let in_box = (0..u.len()).all(|i| u[i] > self.lower[i] + margin && u[i] < self.upper[i] - margin);
        let in_ball = self
            .ball
            .as_ref()
            .is_none_or(|(c, r)| (u - c).norm() < r - margin);
        in_box && in_ball
    }
}

/// Where sample points are drawn: a box around `center`, optionally cut to a
/// ball. Defaults to the chart domain shrunk by a quarter.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRegion {
    pub center: DVector<f64>,
    pub half_widths: DVector<f64>,
    pub radius: Option<f64>,
}

impl SampleRegion {
    pub fn shrunk(domain: &Domain, factor: f64) -> Self {
        Self {
            center: domain.center(),
            half_widths: domain.half_widths() * factor,
            radius: domain.ball.as_ref().map(|(_, r)| r * factor),
        }
    }
}

/// Smooth parametrization of a `d`-dimensional submanifold of flat `R^N`.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    domain_dim: usize,
    ambient_dim: usize,
    embedding: EmbeddingFn,
    linear: Option<DMatrix<f64>>,
    pub domain: Domain,
    pub steps: FdSteps,
    pub sample_region: SampleRegion,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("domain_dim", &self.domain_dim)
            .field("ambient_dim", &self.ambient_dim)
            .field("domain", &self.domain)
            .field("steps", &self.steps)
            .finish()
    }
}

impl Chart {
    pub fn new<F>(name: &str, ambient_dim: usize, domain: Domain, steps: FdSteps, embedding: F) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        let domain_dim = domain.dim();
        if domain_dim == 0 || domain_dim > ambient_dim {
            return Err(GeomError::InvalidArgument(format!(
                "chart {name}: cannot embed dimension {domain_dim} in R^{ambient_dim}"
            )));
        }
        if !(steps.step1 > 0.0 && steps.step2 > 0.0) {
            return Err(GeomError::InvalidArgument("finite-difference steps must be positive".into()));
        }
        Ok(Self {
            name: name.to_string(),
            domain_dim,
            ambient_dim,
            embedding: Arc::new(embedding),
            linear: None,
            sample_region: SampleRegion::shrunk(&domain, 0.75),
            domain,
            steps,
        })
    }

    /// Affine chart `u ↦ A u + b`, whose Jacobian `A` is used exactly.
    pub fn affine(name: &str, a: DMatrix<f64>, b: DVector<f64>, domain: Domain, steps: FdSteps) -> Result<Self> {
        if a.ncols() != domain.dim() || a.nrows() != b.len() {
            return Err(GeomError::InvalidArgument(format!("chart {name}: affine map has the wrong shape")));
        }
        let (am, bm) = (a.clone(), b);
        let mut chart = Self::new(name, a.nrows(), domain, steps, move |u| &am * u + &bm)?;
        chart.linear = Some(a);
        Ok(chart)
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_sample_region(mut self, region: SampleRegion) -> Self {
        self.sample_region = region;
        self
    }

    /// `n` points from the sample region.
    pub fn sample_points(&self, sampler: &mut Sampler, n: usize) -> Vec<DVector<f64>> {
        let r = &self.sample_region;
        (0..n)
            .map(|_| sampler.point_in(&r.center, &r.half_widths, r.radius))
            .collect()
    }

    pub fn point(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.embedding)(u)
    }

    /// Errors unless `u` sits inside the domain by `2·step2`.
    pub fn check_interior(&self, u: &DVector<f64>) -> Result<()> {
        if self.domain.contains(u, 2.0 * self.steps.step2) {
            Ok(())
        } else {
            Err(GeomError::Sampling(format!(
                "parameter {:?} is not interior to chart {}",
                u.as_slice(),
                self.name
            )))
        }
    }

    /// `N × d` Jacobian by central differences with `step1`.
    pub fn jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        if !self.domain.contains(u, self.steps.step1) {
            return Err(GeomError::Sampling(format!(
                "Jacobian stencil leaves chart {} at {:?}",
                self.name,
                u.as_slice()
            )));
        }
        if let Some(a) = &self.linear {
            return Ok(a.clone());
        }
        let h = self.steps.step1;
        let mut jac = DMatrix::zeros(self.ambient_dim, self.domain_dim);
        for i in 0..self.domain_dim {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let col = (self.point(&up) - self.point(&dn)) / (2.0 * h);
            jac.set_column(i, &col);
        }
        Ok(jac)
    }

    pub fn frame(&self, u: &DVector<f64>) -> Result<Frame> {
        Frame::from_jacobian(u.clone(), self.jacobian(u)?)
    }
}

/// Jacobian, induced metric and tangent projector at one parameter point.
#[derive(Debug, Clone)]
pub struct Frame {
    pub u: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    pub metric_inv: DMatrix<f64>,
    pub projector: DMatrix<f64>,
}

impl Frame {
    pub fn from_jacobian(u: DVector<f64>, jacobian: DMatrix<f64>) -> Result<Self> {
        let metric = jacobian.transpose() * &jacobian;
        let eig = metric.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if !(lo > (RANK_FLOOR * RANK_FLOOR) * hi.max(1e-300)) {
            return Err(GeomError::DegenerateChart(format!(
                "Jacobian rank deficient at {:?}",
                u.as_slice()
            )));
        }
        let metric_inv = spd_inverse(&metric)
            .map_err(|_| GeomError::DegenerateChart("induced metric not positive definite".into()))?;
        let projector = &jacobian * &metric_inv * jacobian.transpose();
        Ok(Self {
            u,
            jacobian,
            metric,
            metric_inv,
            projector,
        })
    }

    pub fn dim(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.jacobian.nrows()
    }

    /// Parameter-space components of a tangent vector, `G⁻¹ Jᵀ X`.
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.metric_inv * (self.jacobian.transpose() * x)
    }

    /// Ambient vector of parameter components, `J a`.
    pub fn push(&self, a: &DVector<f64>) -> DVector<f64> {
        &self.jacobian * a
    }

    pub fn tangent_part(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.projector * x
    }

    pub fn normal_part(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.projector * x
    }

    /// Accepts `x` as tangent if its normal part is negligible, re-projecting
    /// small drift; rejects clearly non-tangent input.
    pub fn ensure_tangent(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let len = x.norm();
        let off = self.normal_part(x).norm();
        if off <= TANGENCY_REL * len {
            Ok(x.clone())
        } else if off <= TANGENCY_REPROJECT_FACTOR * TANGENCY_REL * len {
            Ok(self.tangent_part(x))
        } else {
            Err(GeomError::InvalidArgument(format!(
                "vector is not tangent (normal part {off:.3e} of length {len:.3e})"
            )))
        }
    }

    /// Unit tangent vector drawn from the sampler.
    pub fn random_tangent(&self, sampler: &mut Sampler) -> DVector<f64> {
        loop {
            let v = self.tangent_part(&sampler.unit_vector(self.ambient_dim()));
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    /// Orthonormal basis of the tangent space.
    pub fn tangent_basis(&self) -> Vec<DVector<f64>> {
        let cols: Vec<_> = self.jacobian.column_iter().map(|c| c.into_owned()).collect();
        orthonormalize(&cols, 1e-12)
    }
}
