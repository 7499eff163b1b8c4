use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3};

use super::*;
use crate::algebra::{axis_rotation, check_structure_axioms, make_structure_triple, Convention};
use crate::sampling::{SamplePlan, Sampler};
use crate::scenarios::{build_scenario, Scenario, ScenarioKind};
use crate::tolerance::FdSteps;

fn scenario(kind: ScenarioKind) -> Scenario {
    build_scenario(kind, kind.default_sizes(), FdSteps::DEFAULT).unwrap()
}

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

#[test]
fn differential_examples() {
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let s = &flat.submersion;
    let u = DVector::from_element(7, 0.2);
    assert_eq!(s.differential(&u, &e(8, 0)).unwrap(), e(4, 0));

    let hopf = scenario(ScenarioKind::HopfSphere);
    let (s, hyp) = (&hopf.submersion, hopf.hypersurface().unwrap());
    let mut sampler = Sampler::new(5);
    for u in s.total.sample_points(&mut sampler, 8) {
        let st = hyp.structure(&u).unwrap();
        assert!(s.differential(&u, &st.xi[0]).unwrap().amax() < 1e-6);
        let frame = s.total.frame(&u).unwrap();
        let (x, y) = (frame.random_tangent(&mut sampler), frame.random_tangent(&mut sampler));
        let (a, b) = (0.7, -1.3);
        let lhs = s.differential(&u, &(&x * a + &y * b)).unwrap();
        let rhs = s.differential(&u, &x).unwrap() * a + s.differential(&u, &y).unwrap() * b;
        assert!((lhs - rhs).amax() < 1e-6);
    }
}

#[test]
fn split_matches_reeb_directions() {
    let hopf = scenario(ScenarioKind::HopfSphere);
    let (s, hyp) = (&hopf.submersion, hopf.hypersurface().unwrap());
    let u0 = DVector::zeros(7);
    let sf = s.split(&u0).unwrap();
    let st = hyp.structure(&u0).unwrap();
    assert!((&sf.vertical - st.vertical_projector()).amax() < 1e-6);

    let flat = scenario(ScenarioKind::FlatHyperplane);
    let sf = flat.submersion.split(&DVector::from_element(7, 0.1)).unwrap();
    let mut v = DMatrix::zeros(8, 8);
    for i in 4..7 {
        v[(i, i)] = 1.0;
    }
    assert!((&sf.vertical - v).amax() < 1e-12);

    let mut sampler = Sampler::new(9);
    for u in s.total.sample_points(&mut sampler, 8) {
        let sf = s.split(&u).unwrap();
        let (v, h) = (&sf.vertical, &sf.horizontal);
        assert!((v * h).amax() < 1e-9);
        assert!((v + h - &sf.frame.projector).amax() < 1e-12);
        assert!((v * v - v).amax() < 1e-9 && (h * h - h).amax() < 1e-9);
        assert!((v - v.transpose()).amax() < 1e-12);
    }
}

#[test]
fn wrong_kernel_dimension_is_a_structure_error() {
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let s = SubmersionDescriptor::new(
        flat.submersion.total.clone(),
        BaseChart::new("degenerate", crate::geometry::Domain::cube(4, 1.0)),
        Arc::new(|u: &DVector<f64>| DVector::from_vec(vec![u[0], u[0], u[1], u[2]])),
        Arc::new(|q: &DVector<f64>| {
            let mut u = DVector::zeros(7);
            u[0] = q[0];
            u
        }),
        BaseMetric::Pushed,
    )
    .unwrap();
    assert!(matches!(s.split(&DVector::zeros(7)), Err(GeomError::Structure(_))));
}

#[test]
fn horizontal_lifts() {
    let flat = scenario(ScenarioKind::FlatQuaternionicProjection);
    let q = DVector::from_element(4, 0.1);
    let u = flat.submersion.section(&q).unwrap();
    assert_eq!(flat.submersion.horizontal_lift(&q, &e(4, 0), &u).unwrap(), e(8, 0));
    assert!(flat.submersion.horizontal_lift(&(&q * 2.0), &e(4, 0), &u).is_err());

    let hopf = scenario(ScenarioKind::HopfSphere);
    let (s, hyp) = (&hopf.submersion, hopf.hypersurface().unwrap());
    let mut sampler = Sampler::new(11);
    let qs = s.base.sample_points(&mut sampler, 32);
    for q in &qs {
        let u = s.section(q).unwrap();
        let st = hyp.structure(&u).unwrap();
        let xb = sampler.unit_vector(4);
        let x = s.horizontal_lift(q, &xb, &u).unwrap();
        for a in 0..3 {
            assert!(x.dot(&st.xi[a]).abs() < 1e-8);
        }
        assert!((s.differential(&u, &x).unwrap() - xb).amax() < 1e-6);
    }
}

#[test]
fn pushed_metric_is_fubini_study() {
    let hopf = scenario(ScenarioKind::HopfSphere);
    let mut sampler = Sampler::new(2);
    for q in hopf.submersion.base.sample_points(&mut sampler, 8) {
        let g = hopf.submersion.base_metric_at(&q).unwrap();
        let fs = DMatrix::identity(4, 4) / (1.0 + q.norm_squared()).powi(2);
        assert!((g - fs).amax() < 1e-8);
    }
}

#[test]
fn oneill_tensors_vanish_on_the_flat_model() {
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let s = &flat.submersion;
    let mut sampler = Sampler::new(4);
    for u in s.total.sample_points(&mut sampler, 4) {
        let frame = s.total.frame(&u).unwrap();
        let (x, y) = (frame.random_tangent(&mut sampler), frame.random_tangent(&mut sampler));
        assert!(oneill_t(s, &u, &x, &y).unwrap().amax() < 1e-6);
        assert!(oneill_a(s, &u, &x, &y).unwrap().amax() < 1e-6);
    }
}

#[test]
fn hopf_oneill_tensors() {
    let hopf = scenario(ScenarioKind::HopfSphere);
    let (s, hyp) = (&hopf.submersion, hopf.hypersurface().unwrap());
    let mut sampler = Sampler::new(6);
    for u in s.total.sample_points(&mut sampler, 4) {
        let sf = s.split(&u).unwrap();
        let st = hyp.structure(&u).unwrap();
        let (a, b) = (sf.random_vertical(&mut sampler), sf.random_vertical(&mut sampler));
        let t = oneill_t(s, &u, &a, &b).unwrap();
        assert!(t.norm() < 1e-4);
        let rhs = -oneill_t(s, &u, &(&st.phi[0] * &a), &(&st.phi[0] * &b)).unwrap();
        assert!((&t - rhs).norm() < 1e-4);

        let x = sf.random_horizontal(&mut sampler);
        let y = sf.horizontal.clone() * sampler.unit_vector(8);
        let y = y.normalize();
        let axy = oneill_a(s, &u, &x, &y).unwrap();
        for al in 0..3 {
            let expected = (&st.ambient[al] * &x).dot(&y);
            assert!((axy.dot(&st.xi[al]) - expected).abs() < 1e-3);
        }
        assert!((axy - a_bracket(s, &u, &x, &y).unwrap()).norm() < 1e-3);
    }
}

#[test]
fn pushed_triples() {
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let hyp = flat.hypersurface().unwrap();
    let u = DVector::from_element(7, 0.3);
    let pushed = push_structure(&flat.submersion, hyp, &u, 1e-6).unwrap();
    let standard = make_structure_triple(1, Convention::Left).unwrap();
    for a in 0..3 {
        assert!((pushed.j_prime.get(a) - standard.get(a)).amax() < 1e-12);
    }

    let hopf = scenario(ScenarioKind::HopfSphere);
    let (s, hyp) = (&hopf.submersion, hopf.hypersurface().unwrap());
    let q = DVector::zeros(4);
    let pushed = push_structure(s, hyp, &s.section(&q).unwrap(), 1e-6).unwrap();
    let g = s.base_metric_at(&q).unwrap();
    assert!(check_structure_axioms(&pushed.j_prime, &g, 1e-4).unwrap().passed());
    let mut sampler = Sampler::new(8);
    for u in s.total.sample_points(&mut sampler, 8) {
        let sf = s.split(&u).unwrap();
        assert!(prop43_residual(&sf, &hyp.structure(&u).unwrap()) < 1e-6);
    }
}

#[test]
fn fiber_compatibility_examples() {
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let (s, hyp) = (&flat.submersion, flat.hypersurface().unwrap());
    let q = DVector::from_element(4, 0.2);
    let u1 = s.section(&q).unwrap();
    let u2 = s.fiber_move(&u1, &DVector::from_vec(vec![0.3, -0.2, 0.5])).unwrap();
    let fit = fiber_compatibility(s, hyp, &q, &u1, &u2, 1e-8).unwrap();
    assert!((fit.c - Matrix3::identity()).amax() < 1e-8);

    let hopf = scenario(ScenarioKind::HopfSphere);
    let (s, hyp) = (&hopf.submersion, hopf.hypersurface().unwrap());
    let q = DVector::from_vec(vec![0.1, -0.2, 0.05, 0.3]);
    let u1 = s.section(&q).unwrap();
    let same = fiber_compatibility(s, hyp, &q, &u1, &u1, 1e-8).unwrap();
    assert!((same.c - Matrix3::identity()).amax() < 1e-12 && same.fit_residual < 1e-12);
    let u2 = s.fiber_move(&u1, &DVector::from_vec(vec![0.2, 0.1, -0.3])).unwrap();
    let fit = fiber_compatibility(s, hyp, &q, &u1, &u2, 1e-4).unwrap();
    assert!(fit.orthogonality < 1e-4 && (fit.det - 1.0).abs() < 1e-4);
    assert!(fiber_compatibility(s, hyp, &DVector::zeros(4), &u1, &u2, 1e-4).is_err());
}

#[test]
fn qr3_verdicts() {
    let plan = SamplePlan::new(4, 4, 42);
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let r = check_qr3_submersion(&flat.submersion, flat.hypersurface().unwrap(), &plan, 1e-6).unwrap();
    assert!(r.passed(), "{r:?}");
    let hopf = scenario(ScenarioKind::HopfSphere);
    let r = check_qr3_submersion(&hopf.submersion, hopf.hypersurface().unwrap(), &plan, 1e-3).unwrap();
    assert!(r.passed(), "{r:?}");

    // Hopf followed by q ↦ 2q, judged against the Fubini-Study metric
    let base = hopf.submersion.clone();
    let skewed = SubmersionDescriptor::new(
        base.total.clone(),
        BaseChart::new("scaled", crate::geometry::Domain::cube(4, 2.0)),
        {
            let b = base.clone();
            Arc::new(move |u: &DVector<f64>| b.project(u) * 2.0)
        },
        {
            let b = base.clone();
            Arc::new(move |q: &DVector<f64>| (b.section)(&(q * 0.5)))
        },
        BaseMetric::Explicit(Arc::new(|q: &DVector<f64>| {
            DMatrix::identity(4, 4) / (1.0 + q.norm_squared()).powi(2)
        })),
    )
    .unwrap();
    let r = check_qr3_submersion(&skewed, hopf.hypersurface().unwrap(), &plan, 1e-3).unwrap();
    assert!(r.component("isometry").unwrap() > 0.1);
    assert!(!r.passed());
}

#[test]
fn basic_fields_are_fiber_independent() {
    let hopf = scenario(ScenarioKind::HopfSphere);
    let s = &hopf.submersion;
    let q = DVector::from_vec(vec![0.2, 0.0, -0.1, 0.1]);
    let u1 = s.section(&q).unwrap();
    let u2 = s.fiber_move(&u1, &DVector::from_vec(vec![0.0, 0.4, 0.2])).unwrap();
    let r = basic_field_residual(s, &e(4, 0), &e(4, 2), &u1, &u2).unwrap();
    assert!(r < 1e-4, "{r}");
}

#[test]
fn base_hyperkaehler_verdicts() {
    let plan = SamplePlan::new(3, 2, 42);
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let r = check_base_hyperkaehler(&flat.submersion, flat.hypersurface().unwrap(), &plan, 1e-6).unwrap();
    assert!(r.passed(), "{r:?}");
    let hopf = scenario(ScenarioKind::HopfSphere);
    let r = check_base_hyperkaehler(&hopf.submersion, hopf.hypersurface().unwrap(), &plan, 1e-4).unwrap();
    assert!(!r.passed());
    assert!(r.component("qk_defect").unwrap() < 1e-4, "{r:?}");
    assert!(r.component("omega_prime").unwrap() > 0.1);
}

#[test]
fn quaternionic_submersion_verdicts() {
    let plan = SamplePlan::new(4, 4, 42);
    let s = scenario(ScenarioKind::FlatQuaternionicProjection);
    let run = |sc: &Scenario| {
        let total = sc.total_triple.clone();
        let base = sc.base_triple().unwrap().clone();
        check_quaternionic_submersion(&sc.submersion, &move |_| Ok(total.clone()), &move |_| Ok(base.clone()), &plan, 1e-8)
            .unwrap()
    };
    let r = run(&s);
    assert!(r.report.passed(), "{:?}", r.report);
    assert!(r.total_hyperkaehler && r.base_hyperkaehler);

    let rotated = s.with_rotated_base(&axis_rotation(1, 0.7)).unwrap();
    let r = run(&rotated);
    assert!(r.report.passed(), "{:?}", r.report);
    assert!(r.base_forms.max_omega < 1e-8);

    let scaled = s.with_scaled_base_metric(2.0).unwrap();
    let r = run(&scaled);
    assert!((r.report.component("isometry").unwrap() - 1.0).abs() < 1e-9);
    assert!(!r.report.passed());
}

#[test]
fn space_form_flat_and_dimension_gate() {
    let flat = scenario(ScenarioKind::FlatHyperplane);
    let s = &flat.submersion;
    let metric = |q: &DVector<f64>| s.base_metric_at(q);
    let q = DVector::from_element(4, 0.1);
    let sample = crate::geometry::riemann_tensor(&metric, &q, 1e-3).unwrap();
    let t = make_structure_triple(1, Convention::Left).unwrap();
    let fit = space_form_fit(
        &[sample],
        std::slice::from_ref(&t),
        &mut Sampler::new(1),
        4,
        curvature_noise_floor(FdSteps::DEFAULT),
    )
    .unwrap();
    assert!(fit.flat && fit.c == 0.0);

    let s2 = crate::geometry::charts::spherical_s2(1.0, FdSteps::DEFAULT).unwrap();
    let g = |u: &DVector<f64>| Ok(s2.frame(u)?.metric);
    let curved = crate::geometry::riemann_tensor(&g, &DVector::from_vec(vec![1.0, 0.0]), 1e-3).unwrap();
    assert!(matches!(
        space_form_fit(&[curved], &[t], &mut Sampler::new(1), 1, 1e-6),
        Err(GeomError::InvalidArgument(_))
    ));
}

#[test]
fn model_tensor_has_unit_quaternionic_sectional_curvature() {
    let t = make_structure_triple(2, Convention::Left).unwrap();
    let g = DMatrix::identity(8, 8);
    let r1 = model_curvature(&g, &t);
    let x = e(8, 1);
    let y = t.get(2) * &x;
    // g(R(X,Y)Y, X)
    let d = 8;
    let mut k = 0.0;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for m in 0..d {
                    k += r1[((l * d + i) * d + j) * d + m] * x[i] * y[j] * y[m] * x[l];
                }
            }
        }
    }
    assert!((k - 1.0).abs() < 1e-12);
}
