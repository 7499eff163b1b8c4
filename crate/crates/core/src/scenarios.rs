//! Fully wired desk-scale instances and their expected verdicts.
//!
//! * `FlatHyperplane(m)`: `R^{4m+3} ⊂ H^{m+1}` with the left triple,
//!   projected onto `H^m` along the constant Reeb directions.
//! * `HopfSphere(m)`: an orthographic patch of `S^{4m+3} ⊂ H^{m+1}` with the
//!   right triple, projected onto the affine chart `q_i = p_{i+1} p_1⁻¹` of
//!   `P^m(H)`.
//! * `FlatQuaternionicProjection(n, k)`: the coordinate projection
//!   `H^n → H^k` with left triples on both sides.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::Deserialize;

use crate::algebra::{make_structure_triple, so3_rotate, Convention, StructureTriple};
use crate::error::{invalid, GeomError, Result};
use crate::geometry::charts::{flat, graph, hyperplane, OrthographicSphere};
use crate::geometry::Domain;
use crate::hypersurface::OrientedHypersurface;
use crate::quaternion::{join_blocks, split_blocks, Quaternion};
use crate::sampling::Sampler;
use crate::submersion::{BaseChart, BaseMetric, SubmersionDescriptor};
use crate::tolerance::FdSteps;

/// Radius of the orthographic sphere patch; samples use three quarters of it.
pub const SPHERE_PATCH_RADIUS: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    FlatHyperplane,
    HopfSphere,
    FlatQuaternionicProjection,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::FlatHyperplane,
        ScenarioKind::HopfSphere,
        ScenarioKind::FlatQuaternionicProjection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FlatHyperplane => "FlatHyperplane",
            ScenarioKind::HopfSphere => "HopfSphere",
            ScenarioKind::FlatQuaternionicProjection => "FlatQuaternionicProjection",
        }
    }

    pub fn default_sizes(self) -> Sizes {
        match self {
            ScenarioKind::FlatQuaternionicProjection => Sizes::NK(2, 1),
            _ => Sizes::M(1),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GeomError::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

/// Size parameters: `m` for the hypersurface scenarios, `(n, k)` for the
/// flat projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sizes {
    M(usize),
    NK(usize, usize),
}

/// An assembled scenario. Immutable once built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub sizes: Sizes,
    pub steps: FdSteps,
    /// Total space as a hypersurface, for the two hypersurface scenarios.
    pub hypersurface: Option<OrientedHypersurface>,
    pub submersion: SubmersionDescriptor,
    /// Triple on the ambient space of the total chart.
    pub total_triple: StructureTriple,
    /// Triple on base coordinates, where the scenario prescribes one.
    pub base_triple: Option<StructureTriple>,
}

pub fn build_scenario(kind: ScenarioKind, sizes: Sizes, steps: FdSteps) -> Result<Scenario> {
    match (kind, sizes) {
        (ScenarioKind::FlatHyperplane, Sizes::M(m)) => flat_hyperplane(m, steps),
        (ScenarioKind::HopfSphere, Sizes::M(m)) => {
            let mut p0 = DVector::zeros(4 * m + 4);
            p0[0] = 1.0;
            hopf_sphere(m, &p0, steps)
        }
        (ScenarioKind::FlatQuaternionicProjection, Sizes::NK(n, k)) => flat_quaternionic_projection(n, k, steps),
        _ => invalid(format!("{kind} does not take sizes {sizes:?}")),
    }
}

fn check_m(m: usize) -> Result<()> {
    if !(1..=2).contains(&m) {
        return invalid(format!("m = {m} is not supported (m ∈ {{1, 2}})"));
    }
    Ok(())
}

fn coordinate_projection(d: usize, dp: usize) -> DMatrix<f64> {
    DMatrix::identity(dp, d)
}

fn padded(q: &DVector<f64>, d: usize) -> DVector<f64> {
    let mut u = DVector::zeros(d);
    u.rows_mut(0, q.len()).copy_from(q);
    u
}

fn flat_hyperplane(m: usize, steps: FdSteps) -> Result<Scenario> {
    check_m(m)?;
    let (d, dp) = (4 * m + 3, 4 * m);
    let chart = hyperplane(d, 1.0, steps)?;
    let total_triple = make_structure_triple(m + 1, Convention::Left)?;
    let hyp = OrientedHypersurface::new(chart.clone(), total_triple.clone())?;
    let base = BaseChart::new("H^m", Domain::cube(dp, 1.0));
    let submersion = SubmersionDescriptor::new(
        chart,
        base,
        Arc::new(move |u: &DVector<f64>| u.rows(0, dp).into_owned()),
        Arc::new(move |q: &DVector<f64>| padded(q, d)),
        BaseMetric::Pushed,
    )?
    .with_linear_projection(coordinate_projection(d, dp))?
    .with_fiber_move(Arc::new(move |u: &DVector<f64>, s: &DVector<f64>| {
        if s.len() != 3 {
            return invalid("fiber parameter must have 3 components");
        }
        let mut out = u.clone();
        for i in 0..3 {
            out[dp + i] += s[i];
        }
        Ok(out)
    }));
    Ok(Scenario {
        kind: ScenarioKind::FlatHyperplane,
        sizes: Sizes::M(m),
        steps,
        hypersurface: Some(hyp),
        submersion,
        total_triple,
        base_triple: Some(make_structure_triple(m, Convention::Left)?),
    })
}

/// Unit quaternion `(1 + s_1 i + s_2 j + s_3 k) / |·|`.
pub fn fiber_quaternion(s: &DVector<f64>) -> Quaternion {
    Quaternion::new(1.0, s[0], s[1], s[2]).normalized()
}

/// `q_i = p_{i+1} p_1⁻¹`.
pub fn hopf_projection(p: &DVector<f64>) -> DVector<f64> {
    let blocks = split_blocks(p);
    let inv = blocks[0].inverse();
    let qs: Vec<_> = blocks[1..].iter().map(|&b| b * inv).collect();
    join_blocks(&qs)
}

/// Hopf scenario on the orthographic patch around `base_point`, which must
/// have a first quaternion coordinate of norm at least ½. The section is
/// `q ↦ (1, q) λ₀ / sqrt(1 + |q|²)` with `λ₀` chosen so that it passes
/// through the base point.
pub fn hopf_sphere(m: usize, base_point: &DVector<f64>, steps: FdSteps) -> Result<Scenario> {
    check_m(m)?;
    let n = 4 * m + 4;
    if base_point.len() != n {
        return invalid(format!("base point must lie in R^{n}"));
    }
    let p0 = base_point.normalize();
    let head = split_blocks(&p0)[0];
    if head.norm() < 0.5 {
        return invalid("base point is too far from the fibre over the chart origin of P^m(H)");
    }
    let lambda0 = head.normalized();
    let sphere = OrthographicSphere::new(&p0, SPHERE_PATCH_RADIUS, steps)?;
    let chart = sphere.chart.clone();
    let total_triple = make_structure_triple(m + 1, Convention::Right)?;
    let hyp = OrientedHypersurface::new(chart.clone(), total_triple.clone())?;

    let q0 = hopf_projection(&p0);
    let dp = 4 * m;
    let ones = DVector::from_element(dp, 1.0);
    let base = BaseChart::new(
        "P^m(H) affine chart",
        Domain::boxed(&q0 - &ones, &q0 + &ones).with_ball(q0.clone(), 1.0),
    );
    let e = sphere.complement.clone();
    let embed = chart.clone();
    let projection = Arc::new(move |u: &DVector<f64>| hopf_projection(&embed.point(u)));
    let e_sec = e.clone();
    let section = Arc::new(move |q: &DVector<f64>| {
        let mut blocks = vec![Quaternion::ONE];
        blocks.extend(split_blocks(q));
        let scale = 1.0 / (1.0 + q.norm_squared()).sqrt();
        let qs: Vec<_> = blocks.iter().map(|&b| b * lambda0 * scale).collect();
        e_sec.transpose() * join_blocks(&qs)
    });
    let (embed, pc) = (chart.clone(), p0.clone());
    let fiber_move = Arc::new(move |u: &DVector<f64>, s: &DVector<f64>| {
        if s.len() != 3 {
            return invalid("fiber parameter must have 3 components");
        }
        let p = crate::quaternion::right_act(&embed.point(u), fiber_quaternion(s));
        if p.dot(&pc) <= 0.0 {
            return Err(GeomError::Sampling("fibre move leaves the chart hemisphere".into()));
        }
        Ok(e.transpose() * p)
    });
    let submersion = SubmersionDescriptor::new(chart, base, projection, section, BaseMetric::Pushed)?
        .with_fiber_move(fiber_move);
    Ok(Scenario {
        kind: ScenarioKind::HopfSphere,
        sizes: Sizes::M(m),
        steps,
        hypersurface: Some(hyp),
        submersion,
        total_triple,
        base_triple: None,
    })
}

fn flat_quaternionic_projection(n: usize, k: usize, steps: FdSteps) -> Result<Scenario> {
    if !(n <= 3 && n > k && k >= 1) {
        return invalid(format!("(n, k) = ({n}, {k}) is not supported (n ≤ 3, n > k ≥ 1)"));
    }
    let (d, dp) = (4 * n, 4 * k);
    let chart = flat(d, 1.0, steps)?;
    let base = BaseChart::new("H^k", Domain::cube(dp, 1.0));
    let submersion = SubmersionDescriptor::new(
        chart,
        base,
        Arc::new(move |u: &DVector<f64>| u.rows(0, dp).into_owned()),
        Arc::new(move |q: &DVector<f64>| padded(q, d)),
        BaseMetric::Explicit(Arc::new(move |_| DMatrix::identity(dp, dp))),
    )?
    .with_linear_projection(coordinate_projection(d, dp))?
    .with_fiber_move(Arc::new(move |u: &DVector<f64>, s: &DVector<f64>| {
        if s.len() != d - dp {
            return invalid("fiber parameter has the wrong dimension");
        }
        let mut out = u.clone();
        for i in 0..s.len() {
            out[dp + i] += s[i];
        }
        Ok(out)
    }));
    Ok(Scenario {
        kind: ScenarioKind::FlatQuaternionicProjection,
        sizes: Sizes::NK(n, k),
        steps,
        hypersurface: None,
        submersion,
        total_triple: make_structure_triple(n, Convention::Left)?,
        base_triple: Some(make_structure_triple(k, Convention::Left)?),
    })
}

impl Scenario {
    pub fn hypersurface(&self) -> Result<&OrientedHypersurface> {
        self.hypersurface
            .as_ref()
            .ok_or_else(|| GeomError::InvalidArgument(format!("{} has no hypersurface", self.kind)))
    }

    pub fn base_triple(&self) -> Result<&StructureTriple> {
        self.base_triple
            .as_ref()
            .ok_or_else(|| GeomError::InvalidArgument(format!("{} has no prescribed base triple", self.kind)))
    }

    /// Same scenario with the base triple replaced by `Σ_β c_{αβ} J'_β`.
    pub fn with_rotated_base(&self, c: &Matrix3<f64>) -> Result<Scenario> {
        let mut out = self.clone();
        out.base_triple = Some(so3_rotate(self.base_triple()?, c, 1e-9)?);
        Ok(out)
    }

    /// Same scenario with an explicit base metric equal to `factor` times the
    /// current one.
    pub fn with_scaled_base_metric(&self, factor: f64) -> Result<Scenario> {
        let mut out = self.clone();
        let original = self.submersion.clone();
        let metric = move |q: &DVector<f64>| {
            original
                .base_metric_at(q)
                .map(|g| g * factor)
                .unwrap_or_else(|_| DMatrix::from_element(q.len(), q.len(), f64::NAN))
        };
        out.submersion = out.submersion.with_base_metric(BaseMetric::Explicit(Arc::new(metric)));
        Ok(out)
    }
}

/// Hypersurface graph `x_N = height(u)` over `[-1, 1]^{4m+3}` with the left
/// triple on `H^{m+1}`.
pub fn graph_hypersurface<F>(name: &str, m: usize, steps: FdSteps, height: F) -> Result<OrientedHypersurface>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
{
    let chart = graph(name, 4 * m + 3, 1.0, steps, height)?;
    OrientedHypersurface::new(chart, make_structure_triple(m + 1, Convention::Left)?)
}

/// Graph of `Σ a_t sin(b_t·u + c_t)` with three seeded modes of amplitude at
/// most `amplitude`.
pub fn perturbed_graph(m: usize, seed: u64, amplitude: f64, steps: FdSteps) -> Result<OrientedHypersurface> {
    let d = 4 * m + 3;
    let mut sampler = Sampler::new(seed);
    let modes: Vec<(f64, DVector<f64>, f64)> = (0..3)
        .map(|_| {
            let a = amplitude * (0.5 + 0.5 * sampler.scalar().abs());
            let b = sampler.unit_vector(d) * 1.5;
            let c = 3.0 * sampler.scalar();
            (a, b, c)
        })
        .collect();
    graph_hypersurface("perturbed-graph", m, steps, move |u| {
        modes.iter().map(|(a, b, c)| a * (b.dot(u) + c).sin()).sum()
    })
}

/// Graph of `ε u_1 u_{4m+3}`, which bends the first Reeb direction into
/// the first horizontal one: `B(ξ_1, e_1) ≈ ε` near the origin.
pub fn bump_hypersurface(m: usize, eps: f64, steps: FdSteps) -> Result<OrientedHypersurface> {
    let last = 4 * m + 2;
    graph_hypersurface("bump", m, steps, move |u| eps * u[0] * u[last])
}

/// Whether a row's check passes or must fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Tolerance class of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TolKey {
    /// Algebraic identities, exact up to round-off.
    Alg,
    /// Quantities with first derivatives.
    D1,
    /// Curvature-level quantities.
    D2,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExpectationRow {
    pub check: String,
    #[serde(default)]
    pub component: Option<String>,
    pub expect: Verdict,
    pub tolerance: TolKey,
    pub paper_ref: String,
    #[serde(default)]
    pub value: Option<f64>,
}

impl ExpectationRow {
    /// `check` or `check.component`.
    pub fn label(&self) -> String {
        match &self.component {
            Some(c) => format!("{}.{c}", self.check),
            None => self.check.clone(),
        }
    }
}

#[derive(Deserialize)]
struct ScenarioExpectations {
    name: String,
    row: Vec<ExpectationRow>,
}

#[derive(Deserialize)]
struct ExpectationFile {
    scenario: Vec<ScenarioExpectations>,
}

/// The expectation data shipped with the crate.
pub const EXPECTATIONS_TOML: &str = include_str!("../data/expectations.toml");

fn expectations() -> &'static [ScenarioExpectations] {
    static PARSED: OnceLock<Vec<ScenarioExpectations>> = OnceLock::new();
    PARSED.get_or_init(|| {
        toml::from_str::<ExpectationFile>(EXPECTATIONS_TOML)
            .expect("bundled expectations parse")
            .scenario
    })
}

pub fn expected_table(s: &Scenario) -> Vec<ExpectationRow> {
    expectations()
        .iter()
        .find(|e| e.name == s.kind.name())
        .map(|e| e.row.clone())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("foo".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn size_gates() {
        let st = FdSteps::DEFAULT;
        assert!(build_scenario(ScenarioKind::FlatHyperplane, Sizes::M(3), st).is_err());
        assert!(build_scenario(ScenarioKind::HopfSphere, Sizes::M(0), st).is_err());
        assert!(build_scenario(ScenarioKind::FlatQuaternionicProjection, Sizes::NK(2, 2), st).is_err());
        assert!(build_scenario(ScenarioKind::FlatQuaternionicProjection, Sizes::NK(4, 1), st).is_err());
        assert!(build_scenario(ScenarioKind::FlatHyperplane, Sizes::NK(2, 1), st).is_err());
    }

    #[test]
    fn flat_hyperplane_layout() {
        let s = build_scenario(ScenarioKind::FlatHyperplane, Sizes::M(1), FdSteps::DEFAULT).unwrap();
        let hyp = s.hypersurface().unwrap();
        assert_eq!(hyp.chart.ambient_dim(), 8);
        let st = hyp.structure(&DVector::zeros(7)).unwrap();
        assert_eq!(st.normal[7], 1.0);
        assert_eq!(s.submersion.base.dim(), 4);
        assert_eq!(s.submersion.fiber_dim, 3);
    }

    #[test]
    fn hopf_section_is_right_inverse() {
        let s = build_scenario(ScenarioKind::HopfSphere, Sizes::M(1), FdSteps::DEFAULT).unwrap();
        let mut sampler = Sampler::new(3);
        for q in s.submersion.base.sample_points(&mut sampler, 16) {
            assert!(s.submersion.section_residual(&q).unwrap() < 1e-12);
        }
        let p0 = DVector::from_vec(vec![0.8, 0.1, -0.2, 0.3, 0.2, 0.1, 0.0, -0.1]);
        let t = hopf_sphere(1, &p0, FdSteps::DEFAULT).unwrap();
        let q0 = hopf_projection(&p0.normalize());
        let u0 = t.submersion.section(&q0).unwrap();
        assert!(u0.amax() < 1e-12);
        assert!(t.submersion.section_residual(&q0).unwrap() < 1e-12);
    }

    #[test]
    fn every_scenario_has_a_table_with_required_failures() {
        for k in ScenarioKind::ALL {
            let s = build_scenario(k, k.default_sizes(), FdSteps::DEFAULT).unwrap();
            let rows = expected_table(&s);
            assert!(!rows.is_empty());
            assert!(rows.iter().any(|r| r.expect == Verdict::Fail), "{k}");
        }
    }
}
