use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::fd::richardson;
use crate::linalg::spd_inverse;

/// Metric components as a function of chart parameters.
pub type MetricField<'a> = dyn Fn(&DVector<f64>) -> Result<DMatrix<f64>> + 'a;

pub const SIGN_CONVENTION: &str = "R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y]Z";

/// Christoffel symbols `Γ^k_{ij}` stored as `d` matrices, `gamma[k][(i, j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub gamma: Vec<DMatrix<f64>>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[k][(i, j)]
    }

    /// Matrix of `Z ↦ Γ(X, Z)`, entries `Γ^l_{ik} X^i` at `(l, k)`.
    pub fn contract(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |l, k| (0..d).map(|i| self.gamma[l][(i, k)] * x[i]).sum())
    }

    fn flat(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim().pow(3), self.gamma.iter().flat_map(|m| m.iter().copied()))
    }

    fn from_flat(d: usize, v: &DVector<f64>) -> Self {
        let gamma = (0..d)
            .map(|k| DMatrix::from_column_slice(d, d, &v.as_slice()[k * d * d..(k + 1) * d * d]))
            .collect();
        Self { gamma }
    }
}

/// `Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} - ∂_l g_{ij})` with metric
/// derivatives by Richardson-extrapolated central differences.
pub fn christoffel(metric: &MetricField<'_>, u: &DVector<f64>, h: f64) -> Result<Christoffel> {
    let d = u.len();
    let g = metric(u)?;
    let ginv = spd_inverse(&g).map_err(|_| GeomError::NumericalFailure("metric is not positive definite".into()))?;
    let mut dg = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        let checked = |v: &DVector<f64>| -> Result<DMatrix<f64>> {
            let m = metric(v)?;
            if m.clone().cholesky().is_none() {
                return Err(GeomError::NumericalFailure("indefinite metric on the stencil".into()));
            }
            Ok(m)
        };
        dg.push(richardson(&checked, u, &e, h)?);
    }
    let mut gamma = vec![DMatrix::zeros(d, d); d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma[k][(i, j)] = 0.5 * s;
            }
        }
    }
    Ok(Christoffel { gamma })
}

/// Curvature at one parameter point.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: DVector<f64>,
    pub metric: DMatrix<f64>,
    pub christoffel: Christoffel,
    /// `R^l_{ijk}` with `R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l`, flat index
    /// `((l·d + i)·d + j)·d + k`.
    riemann: Vec<f64>,
    pub convention: &'static str,
    pub antisymmetry_residual: f64,
    pub bianchi_residual: f64,
}

impl CurvatureSample {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    fn idx(&self, l: usize, i: usize, j: usize, k: usize) -> usize {
        let d = self.dim();
        ((l * d + i) * d + j) * d + k
    }

    pub fn riemann(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.riemann[self.idx(l, i, j, k)]
    }

    /// `R_{ijkl} = g(R(∂_i, ∂_j)∂_k, ∂_l)`.
    pub fn lowered(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (0..self.dim()).map(|m| self.metric[(l, m)] * self.riemann(m, i, j, k)).sum()
    }

    /// Components of `R(X, Y)Z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        DVector::from_fn(d, |l, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        s += self.riemann(l, i, j, k) * x[i] * y[j] * z[k];
                    }
                }
            }
            s
        })
    }

    /// `g(R(X,Y)Y, X) / (|X|²|Y|² - g(X,Y)²)`.
    pub fn sectional(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let g = &self.metric;
        let num = self.apply(x, y, y).dot(&(g * x));
        let gxx = x.dot(&(g * x));
        let gyy = y.dot(&(g * y));
        let gxy = x.dot(&(g * y));
        num / (gxx * gyy - gxy * gxy)
    }

    /// All `R^l_{ijk}` in flat order.
    pub fn components(&self) -> &[f64] {
        &self.riemann
    }
}

/// Riemann tensor from central differences of Christoffel symbols plus the
/// quadratic terms:
/// `R^l_{ijk} = ∂_i Γ^l_{jk} - ∂_j Γ^l_{ik} + Γ^l_{im} Γ^m_{jk} - Γ^l_{jm} Γ^m_{ik}`.
pub fn riemann_tensor(metric: &MetricField<'_>, u: &DVector<f64>, h: f64) -> Result<CurvatureSample> {
    let d = u.len();
    let gamma = christoffel(metric, u, h)?;
    let flat_gamma = |v: &DVector<f64>| -> Result<DVector<f64>> { Ok(christoffel(metric, v, h)?.flat()) };
    let mut dgamma = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        dgamma.push(Christoffel::from_flat(d, &richardson(&flat_gamma, u, &e, h)?));
    }
    let mut riemann = vec![0.0; d.pow(4)];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut r = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..d {
                        r += gamma.get(l, i, m) * gamma.get(m, j, k) - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    riemann[((l * d + i) * d + j) * d + k] = r;
                }
            }
        }
    }
    let mut sample = CurvatureSample {
        point: u.clone(),
        metric: metric(u)?,
        christoffel: gamma,
        riemann,
        convention: SIGN_CONVENTION,
        antisymmetry_residual: 0.0,
        bianchi_residual: 0.0,
    };
    let mut anti: f64 = 0.0;
    let mut bianchi: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let r = sample.lowered(i, j, k, l);
                    anti = anti
                        .max((r + sample.lowered(j, i, k, l)).abs())
                        .max((r + sample.lowered(i, j, l, k)).abs());
                    bianchi = bianchi.max(
                        (sample.riemann(l, i, j, k) + sample.riemann(l, j, k, i) + sample.riemann(l, k, i, j)).abs(),
                    );
                }
            }
        }
    }
    sample.antisymmetry_residual = anti;
    sample.bianchi_residual = bianchi;
    Ok(sample)
}
