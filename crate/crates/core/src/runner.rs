//! Batch verification of a scenario's expected table, with deterministic
//! text and JSON reports.

use std::cell::OnceCell;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde_json::value::RawValue;

use crate::algebra::{axis_rotation, check_structure_axioms};
use crate::error::{invalid, GeomError, Result};
use crate::geometry::{christoffel, classify_umbilical, riemann_tensor, UmbilicReport};
use crate::hypersurface::{check_ac3_axioms, check_cosymplectic, check_decomposition, check_mixed_geodesic};
use crate::report::{CheckReport, Residual, ResidualLog};
use crate::sampling::{SamplePlan, Sampler};
use crate::scenarios::{build_scenario, expected_table, ExpectationRow, Scenario, ScenarioKind, Sizes, TolKey, Verdict};
use crate::submersion::{
    a_bracket, basic_covariant, check_base_hyperkaehler, check_qr3_submersion, check_quaternionic_submersion,
    curvature_noise_floor, fiber_compatibility, oneill_a, oneill_t, push_structure, pushed_triple_field,
    space_form_fit,
};
use crate::tolerance::{FdSteps, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// Everything that determines a run. Identical configs give identical
/// report bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub sizes: Sizes,
    pub samples: usize,
    pub vectors: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub steps: FdSteps,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            sizes: scenario.default_sizes(),
            samples: 32,
            vectors: 8,
            seed: 42,
            tolerances: Tolerances::DEFAULT,
            steps: FdSteps::DEFAULT,
            format: Format::Text,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 4 {
            return invalid("--samples must be at least 4");
        }
        if self.vectors < 2 {
            return invalid("--vectors must be at least 2");
        }
        let t = self.tolerances;
        if !(t.alg > 0.0 && t.d1 > 0.0 && t.d2 > 0.0) {
            return invalid("tolerances must be positive");
        }
        if !(self.steps.step1 > 0.0 && self.steps.step2 > 0.0) {
            return invalid("finite-difference steps must be positive");
        }
        Ok(())
    }

    pub fn plan(&self) -> SamplePlan {
        SamplePlan::new(self.samples, self.vectors, self.seed)
    }

    pub fn tolerance(&self, key: TolKey) -> f64 {
        match key {
            TolKey::Alg => self.tolerances.alg,
            TolKey::D1 => self.tolerances.d1,
            TolKey::D2 => self.tolerances.d2,
        }
    }
}

/// One evaluated row of the expected table.
#[derive(Debug, Clone, PartialEq)]
pub struct RowOutcome {
    pub row: ExpectationRow,
    pub tolerance: f64,
    pub max_residual: f64,
    /// Verdict of the check itself.
    pub check_passed: bool,
    /// The check's verdict equals the expected one.
    pub matched: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub rows: Vec<RowOutcome>,
}

impl RunReport {
    pub fn overall(&self) -> bool {
        self.rows.iter().all(|r| r.matched)
    }

    pub fn exit_code(&self) -> i32 {
        if self.overall() {
            0
        } else {
            1
        }
    }
}

/// Lazily shared intermediate results.
struct Context<'a> {
    scenario: &'a Scenario,
    config: &'a RunConfig,
    umbilic: OnceCell<UmbilicReport>,
}

impl Context<'_> {
    fn plan(&self) -> SamplePlan {
        self.config.plan()
    }

    fn sampler(&self, salt: u64) -> Sampler {
        Sampler::new(self.config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
    }

    fn umbilic(&self) -> Result<&UmbilicReport> {
        if let Some(r) = self.umbilic.get() {
            return Ok(r);
        }
        let chart = &self.scenario.hypersurface()?.chart;
        let mut sampler = self.sampler(1);
        let points = chart.sample_points(&mut sampler, self.config.samples.max(8));
        let report = classify_umbilical(chart, &points, self.config.tolerances.d1)?;
        Ok(self.umbilic.get_or_init(|| report))
    }
}

/// Moves `u` along its fiber by a random group parameter, halving it until
/// the image stays inside the chart.
fn fiber_partner(s: &Scenario, u: &DVector<f64>, sampler: &mut Sampler, scale: f64) -> Result<DVector<f64>> {
    let dim = s.submersion.fiber_dim;
    let mut shift = sampler.vector(dim) * scale;
    for _ in 0..12 {
        match s.submersion.fiber_move(u, &shift) {
            Err(GeomError::Sampling(_)) => shift *= 0.5,
            other => return other,
        }
    }
    Err(GeomError::Sampling("no fibre partner inside the chart".into()))
}

fn run_check(ctx: &Context<'_>, check: &str, tol: f64, value: Option<f64>) -> Result<CheckReport> {
    let s = ctx.scenario;
    let plan = ctx.plan();
    let sub = &s.submersion;
    match check {
        "section_identity" => {
            let mut log = ResidualLog::new(check, "projection after section is the identity", tol);
            let mut sampler = ctx.sampler(2);
            for (i, q) in sub.base.sample_points(&mut sampler, plan.points).iter().enumerate() {
                log.record(i, "section", sub.section_residual(q)?);
            }
            Ok(log.finish())
        }
        "structure_axioms" => {
            let n = s.total_triple.dim();
            check_structure_axioms(&s.total_triple, &DMatrix::identity(n, n), tol)
        }
        "base_structure_axioms" => {
            let q = sub.base.domain.center();
            check_structure_axioms(s.base_triple()?, &sub.base_metric_at(&q)?, tol)
        }
        "ac3_axioms" => check_ac3_axioms(s.hypersurface()?, &plan, tol),
        "decomposition" => check_decomposition(s.hypersurface()?, &plan, tol),
        "cosymplectic" => check_cosymplectic(s.hypersurface()?, &plan, tol),
        "mixed_geodesic" => check_mixed_geodesic(s.hypersurface()?, &plan, tol),
        "totally_geodesic" => {
            let u = ctx.umbilic()?;
            let mut log = ResidualLog::new(check, "vanishing second fundamental form", tol);
            for (i, sh) in u.shapes.iter().enumerate() {
                log.record(i, "max_b", sh.max_b);
            }
            Ok(log.finish())
        }
        "extrinsic_sphere" => {
            let u = ctx.umbilic()?;
            let mut log = ResidualLog::new(check, "totally umbilical with nonzero parallel mean curvature", tol);
            for (i, sh) in u.shapes.iter().enumerate() {
                log.record(i, "umbilical", sh.umbilical_residual);
                log.record(i, "normal_parallel", sh.normal_parallel_residual);
                let weak = if sh.mean_curvature.norm() > 10.0 * tol { 0.0 } else { 1.0 };
                log.record(i, "weak_mean_curvature", weak);
            }
            Ok(log.finish())
        }
        "qr3_submersion" => check_qr3_submersion(sub, s.hypersurface()?, &plan, tol),
        "pushed_structure" => {
            let hyp = s.hypersurface()?;
            let mut log = ResidualLog::new(check, "pushed triple is an almost quaternionic hermitian structure", tol);
            let mut sampler = ctx.sampler(3);
            for (i, q) in sub.base.sample_points(&mut sampler, plan.points).iter().enumerate() {
                let pushed = push_structure(sub, hyp, &sub.section(q)?, f64::INFINITY)?;
                log.record(i, "invariance", pushed.invariance_residual);
                let axioms = check_structure_axioms(&pushed.j_prime, &sub.base_metric_at(q)?, tol)?;
                log.absorb(i, &axioms);
            }
            Ok(log.finish())
        }
        "fiber_compatibility" => {
            let hyp = s.hypersurface()?;
            let mut log = ResidualLog::new(check, "pushed bases along a fiber differ by C ∈ SO(3)", tol);
            let mut sampler = ctx.sampler(4);
            for (i, q) in sub.base.sample_points(&mut sampler, plan.points).iter().enumerate() {
                let u1 = sub.section(q)?;
                let u2 = fiber_partner(s, &u1, &mut sampler, 0.5)?;
                let fit = fiber_compatibility(sub, hyp, q, &u1, &u2, f64::INFINITY)?;
                log.record(i, "fit", fit.fit_residual);
                log.record(i, "orthogonality", fit.orthogonality);
                log.record(i, "determinant", (fit.det - 1.0).abs());
            }
            Ok(log.finish())
        }
        "oneill_t" => {
            let hyp = s.hypersurface()?;
            let mut log = ResidualLog::new(check, "T_U V on vertical pairs and T_U V = -T_{φU} φV", tol);
            let mut sampler = ctx.sampler(5);
            for (i, u) in sub.total.sample_points(&mut sampler, plan.points).iter().enumerate() {
                let sf = sub.split(u)?;
                let st = hyp.structure(u)?;
                for _ in 0..plan.vectors / 2 {
                    let (a, b) = (sf.random_vertical(&mut sampler), sf.random_vertical(&mut sampler));
                    let t = oneill_t(sub, u, &a, &b)?;
                    log.record(i, "t_vertical", t.norm());
                    for phi in &st.phi {
                        let other = oneill_t(sub, u, &(phi * &a), &(phi * &b))?;
                        log.record(i, "t_identity", (&t + other).norm());
                    }
                }
            }
            Ok(log.finish())
        }
        "oneill_a" | "a_bracket" | "a_structure" => {
            let mut log = ResidualLog::new(check, "A_X Y on horizontal pairs", tol);
            let mut sampler = ctx.sampler(6);
            let hyp = s.hypersurface()?;
            for (i, u) in sub.total.sample_points(&mut sampler, plan.points).iter().enumerate() {
                let sf = sub.split(u)?;
                let st = hyp.structure(u)?;
                for _ in 0..plan.vectors / 2 {
                    let (x, y) = (sf.random_horizontal(&mut sampler), sf.random_horizontal(&mut sampler));
                    let axy = oneill_a(sub, u, &x, &y)?;
                    match check {
                        "oneill_a" => log.record(i, "a_horizontal", axy.norm()),
                        "a_bracket" => log.record(i, "bracket", (&axy - a_bracket(sub, u, &x, &y)?).norm()),
                        _ => {
                            for a in 0..3 {
                                let expected = (&st.ambient[a] * &x).dot(&y);
                                log.record(i, "structure", (axy.dot(&st.xi[a]) - expected).abs());
                                let jx = (&sf.horizontal * (&st.ambient[a] * &x)).normalize();
                                let pair = oneill_a(sub, u, &x, &jx)?.norm();
                                log.record(i, "unit_pair_deficit", (0.5 - pair).max(0.0));
                            }
                        }
                    }
                }
            }
            Ok(log.finish())
        }
        "basic_fields" => {
            let mut log = ResidualLog::new(check, "h∇_X Y of basic fields is basic and π-related to ∇'_X' Y'", tol);
            let mut sampler = ctx.sampler(7);
            let dp = sub.base.dim();
            let metric = |q: &DVector<f64>| sub.base_metric_at(q);
            for (i, q) in sub.base.sample_points(&mut sampler, plan.points).iter().enumerate() {
                let u1 = sub.section(q)?;
                let u2 = fiber_partner(s, &u1, &mut sampler, 0.5)?;
                let gamma = christoffel(&metric, q, s.steps.step2)?;
                for _ in 0..plan.vectors / 4 + 1 {
                    let (x, y) = (sampler.unit_vector(dp), sampler.unit_vector(dp));
                    let c1 = basic_covariant(sub, &x, &y, &u1)?;
                    let c2 = basic_covariant(sub, &x, &y, &u2)?;
                    log.record(i, "fiber_independence", (&c1 - &c2).amax());
                    log.record(i, "base_connection", (&c1 - gamma.contract(&x) * &y).amax());
                }
            }
            Ok(log.finish())
        }
        "base_hyperkaehler" => check_base_hyperkaehler(sub, s.hypersurface()?, &plan, tol),
        "space_form" => {
            let hyp = s.hypersurface()?;
            let expected = value.ok_or_else(|| GeomError::InvalidArgument("space_form needs a target value".into()))?;
            let metric = |q: &DVector<f64>| sub.base_metric_at(q);
            let field = pushed_triple_field(sub, hyp);
            let mut sampler = ctx.sampler(8);
            let points = sub.base.sample_points(&mut sampler, plan.points.clamp(8, 16));
            let mut curv = Vec::with_capacity(points.len());
            let mut triples = Vec::with_capacity(points.len());
            for q in &points {
                curv.push(riemann_tensor(&metric, q, s.steps.step2)?);
                triples.push(field(q)?);
            }
            let fit = space_form_fit(&curv, &triples, &mut sampler, 4, curvature_noise_floor(s.steps))?;
            let mut log = ResidualLog::new(check, "quaternionic space form curvature", tol);
            let deviation = if expected == 0.0 {
                fit.c.abs()
            } else {
                (fit.c - expected).abs() / expected.abs()
            };
            log.record(0, "c_deviation", deviation);
            log.record(0, "relative_residual", fit.relative_residual);
            log.record(0, "spread", fit.spread);
            log.record(0, "flatness_mismatch", if fit.flat == (expected == 0.0) { 0.0 } else { 1.0 });
            Ok(log.finish())
        }
        "quaternionic_submersion" | "quaternionic_submersion_rotated" | "quaternionic_submersion_scaled" => {
            let variant = match check {
                "quaternionic_submersion_rotated" => s.with_rotated_base(&(axis_rotation(0, 0.4) * axis_rotation(2, 1.1)))?,
                "quaternionic_submersion_scaled" => s.with_scaled_base_metric(2.0)?,
                _ => s.clone(),
            };
            let total = variant.total_triple.clone();
            let base = variant.base_triple()?.clone();
            let r = check_quaternionic_submersion(
                &variant.submersion,
                &move |_| Ok(total.clone()),
                &move |_| Ok(base.clone()),
                &plan,
                tol,
            )?;
            let mut log = ResidualLog::new(check, &r.report.reference, tol);
            for rec in &r.report.per_sample {
                log.record(rec.index, "per_sample", rec.residual);
            }
            let mut out = log.finish();
            out.components = r.report.components.clone();
            out.components.push(Residual {
                name: "omega_total".into(),
                value: r.total_forms.max_omega,
            });
            out.components.push(Residual {
                name: "omega_base".into(),
                value: r.base_forms.max_omega,
            });
            Ok(out)
        }
        other => invalid(format!("unknown check {other:?}")),
    }
}

/// Builds the scenario and evaluates every row of its expected table.
pub fn run_checks(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let scenario = build_scenario(config.scenario, config.sizes, config.steps)?;
    let ctx = Context {
        scenario: &scenario,
        config,
        umbilic: OnceCell::new(),
    };
    let mut cache: HashMap<(String, u64), std::result::Result<CheckReport, String>> = HashMap::new();
    let mut rows = Vec::new();
    for row in expected_table(&scenario) {
        let tol = config.tolerance(row.tolerance);
        let key = (row.check.clone(), tol.to_bits());
        let result = cache
            .entry(key)
            .or_insert_with(|| run_check(&ctx, &row.check, tol, row.value).map_err(|e| e.to_string()))
            .clone();
        let outcome = match result {
            Ok(report) => {
                let (max_residual, check_passed) = match &row.component {
                    Some(c) => match report.component(c) {
                        Some(v) => (v, v < tol),
                        None => (f64::NAN, false),
                    },
                    None => (report.max_residual(), report.passed()),
                };
                let missing = row.component.as_ref().is_some_and(|c| report.component(c).is_none());
                RowOutcome {
                    matched: !missing && check_passed == (row.expect == Verdict::Pass),
                    error: missing.then(|| format!("check has no component {:?}", row.component)),
                    tolerance: tol,
                    max_residual,
                    check_passed,
                    row,
                }
            }
            Err(e) => RowOutcome {
                tolerance: tol,
                max_residual: f64::NAN,
                check_passed: false,
                matched: false,
                error: Some(e),
                row,
            },
        };
        rows.push(outcome);
    }
    Ok(RunReport {
        config: config.clone(),
        rows,
    })
}

/// 17 significant digits, `null` for non-finite values.
struct Sci(f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

struct Params(Sizes);

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Sizes::M(m) => {
                let mut st = s.serialize_struct("params", 1)?;
                st.serialize_field("m", &m)?;
                st.end()
            }
            Sizes::NK(n, k) => {
                let mut st = s.serialize_struct("params", 2)?;
                st.serialize_field("n", &n)?;
                st.serialize_field("k", &k)?;
                st.end()
            }
        }
    }
}

#[derive(serde::Serialize)]
struct JsonConfig {
    samples: usize,
    vectors: usize,
    seed: u64,
    tol_alg: Sci,
    tol_d1: Sci,
    tol_d2: Sci,
    fd_step1: Sci,
    fd_step2: Sci,
}

#[derive(serde::Serialize)]
struct JsonRow<'a> {
    check_name: String,
    paper_ref: &'a str,
    expected: &'static str,
    passed: bool,
    max_residual: Sci,
    tolerance: Sci,
}

#[derive(serde::Serialize)]
struct JsonReport<'a> {
    scenario: &'static str,
    params: Params,
    config: JsonConfig,
    rows: Vec<JsonRow<'a>>,
    overall: &'static str,
}

fn overall_label(r: &RunReport) -> &'static str {
    if r.overall() {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn render_json(r: &RunReport) -> String {
    let c = &r.config;
    let doc = JsonReport {
        scenario: c.scenario.name(),
        params: Params(c.sizes),
        config: JsonConfig {
            samples: c.samples,
            vectors: c.vectors,
            seed: c.seed,
            tol_alg: Sci(c.tolerances.alg),
            tol_d1: Sci(c.tolerances.d1),
            tol_d2: Sci(c.tolerances.d2),
            fd_step1: Sci(c.steps.step1),
            fd_step2: Sci(c.steps.step2),
        },
        rows: r
            .rows
            .iter()
            .map(|o| JsonRow {
                check_name: o.row.label(),
                paper_ref: &o.row.paper_ref,
                expected: o.row.expect.label(),
                passed: o.matched,
                max_residual: Sci(o.max_residual),
                tolerance: Sci(o.tolerance),
            })
            .collect(),
        overall: overall_label(r),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

fn sizes_label(s: Sizes) -> String {
    match s {
        Sizes::M(m) => format!("m={m}"),
        Sizes::NK(n, k) => format!("n={n} k={k}"),
    }
}

pub fn render_text(r: &RunReport) -> String {
    let c = &r.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {} ({}) samples={} vectors={} seed={}",
        c.scenario.name(),
        sizes_label(c.sizes),
        c.samples,
        c.vectors,
        c.seed
    );
    let width = r.rows.iter().map(|o| o.row.label().len()).max().unwrap_or(5).max(5);
    let _ = writeln!(
        out,
        "{:<width$}  {:<6}  {:<7}  {:>23}  {:>9}  {:<4}  REFERENCE",
        "CHECK", "EXPECT", "VERDICT", "MAX_RESIDUAL", "TOL", "ROW"
    );
    for o in &r.rows {
        let verdict = match (&o.error, o.check_passed) {
            (Some(_), _) => "error",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:<6}  {:<7}  {:>23.16e}  {:>9.1e}  {:<4}  {}",
            o.row.label(),
            o.row.expect.label(),
            verdict,
            o.max_residual,
            o.tolerance,
            if o.matched { "ok" } else { "BAD" },
            o.row.paper_ref
        );
        if let Some(e) = &o.error {
            let _ = writeln!(out, "{:<width$}  error: {e}", "");
        }
    }
    let matched = r.rows.iter().filter(|o| o.matched).count();
    let _ = writeln!(out, "OVERALL {} ({matched}/{} rows as expected)", overall_label(r), r.rows.len());
    out
}

pub fn render(r: &RunReport) -> String {
    match r.config.format {
        Format::Text => render_text(r),
        Format::Json => render_json(r),
    }
}

/// Runs, writes the report and returns the exit code: 0 when every row
/// matches, 1 on a mismatch, 2 on a configuration error.
pub fn run(config: &RunConfig) -> i32 {
    let report = match run_checks(config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = render(&report);
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}
