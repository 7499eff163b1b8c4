//! Derived quantities checked against independently computed values.

use nalgebra::{DMatrix, DVector};
use qkgeom::geometry::charts::OrthographicSphere;
use qkgeom::geometry::{
    coordinate_field, levi_civita, lie_bracket, mean_curvature, riemann_tensor, second_fundamental_form, Chart,
    Domain,
};
use qkgeom::sampling::Sampler;
use qkgeom::scenarios::{build_scenario, hopf_projection, ScenarioKind};
use qkgeom::submersion::oneill_t;
use qkgeom::tolerance::FdSteps;

type Q = [f64; 4];

fn mul(a: Q, b: Q) -> Q {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn inv(a: Q) -> Q {
    let n = a.iter().map(|x| x * x).sum::<f64>();
    [a[0] / n, -a[1] / n, -a[2] / n, -a[3] / n]
}

fn block(v: &DVector<f64>, b: usize) -> Q {
    [v[4 * b], v[4 * b + 1], v[4 * b + 2], v[4 * b + 3]]
}

fn right_mul(v: &DVector<f64>, q: Q) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for b in 0..v.len() / 4 {
        let r = mul(block(v, b), q);
        for i in 0..4 {
            out[4 * b + i] = r[i];
        }
    }
    out
}

fn hopf() -> qkgeom::scenarios::Scenario {
    build_scenario(ScenarioKind::HopfSphere, qkgeom::scenarios::Sizes::M(1), FdSteps::DEFAULT).unwrap()
}

#[test]
fn hopf_projection_is_quaternion_quotient() {
    let mut sampler = Sampler::new(1);
    for _ in 0..16 {
        let p = sampler.unit_vector(8);
        let q = hopf_projection(&p);
        let expected = mul(block(&p, 1), inv(block(&p, 0)));
        for i in 0..4 {
            assert!((q[i] - expected[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn sphere_reeb_fields_are_right_multiples_of_the_position() {
    // ξ_α = -J_α N with N = p and the right triple (i, k, j)
    let s = hopf();
    let hyp = s.hypersurface().unwrap();
    let units: [Q; 3] = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]];
    let mut sampler = Sampler::new(2);
    for u in hyp.chart.sample_points(&mut sampler, 8) {
        let p = hyp.chart.point(&u);
        let st = hyp.structure(&u).unwrap();
        for (a, unit) in units.iter().enumerate() {
            let expected = -right_mul(&p, *unit);
            let dev = (&st.xi[a] - expected).amax();
            // the normal comes from a finite-difference Jacobian
            assert!(dev < 1e-9, "{dev:e}");
        }
    }
}

#[test]
fn pushed_metric_is_fubini_study() {
    let s = hopf();
    let sub = &s.submersion;
    let mut sampler = Sampler::new(3);
    for q in sub.base.sample_points(&mut sampler, 12) {
        let fs = DMatrix::<f64>::identity(4, 4) / (1.0 + q.norm_squared()).powi(2);
        let g = sub.base_metric_at(&q).unwrap();
        assert!((g - fs).amax() < 1e-8);
    }
}

#[test]
fn t_tensor_matches_fibre_second_fundamental_form() {
    let s = hopf();
    let sub = &s.submersion;
    let mut sampler = Sampler::new(4);
    for u in sub.total.sample_points(&mut sampler, 4) {
        let p = sub.total.point(&u);
        let pc = p.clone();
        // the fibre through p, parametrized by the imaginary part of a unit quaternion
        let fibre = Chart::new("fibre", 8, Domain::cube(3, 0.3), FdSteps::DEFAULT, move |t| {
            let n = (1.0 + t.norm_squared()).sqrt();
            right_mul(&pc, [1.0 / n, t[0] / n, t[1] / n, t[2] / n])
        })
        .unwrap();
        let origin = DVector::zeros(3);
        let frame = fibre.frame(&origin).unwrap();
        let basis = frame.tangent_basis();
        for a in &basis {
            for b in &basis {
                let bf = second_fundamental_form(&fibre, &origin, a, b).unwrap();
                // B of the fibre inside S^7 is the part of B tangent to the sphere
                let oracle = &bf - &p * bf.dot(&p);
                let t = oneill_t(sub, &u, a, b).unwrap();
                assert!((t - &oracle).norm() < 1e-4);
                assert!(oracle.norm() < 1e-4);
            }
        }
    }
}

#[test]
fn unit_sphere_curvature_and_gauss_equation() {
    let p0 = DVector::from_vec(vec![0.2, -0.3, 0.9]);
    let sphere = OrthographicSphere::new(&p0, 0.6, FdSteps::DEFAULT).unwrap();
    let c = &sphere.chart;
    let metric = |u: &DVector<f64>| Ok(c.frame(u)?.metric);
    let mut sampler = Sampler::new(5);
    for u in c.sample_points(&mut sampler, 6) {
        let frame = c.frame(&u).unwrap();
        let basis = frame.tangent_basis();
        let (x, y) = (&basis[0], &basis[1]);
        let r = riemann_tensor(&metric, &u, 1e-3).unwrap();
        let k = r.sectional(&frame.coords(x), &frame.coords(y));
        assert!((k - 1.0).abs() < 1e-2, "{k}");
        let bxx = second_fundamental_form(c, &u, x, x).unwrap();
        let byy = second_fundamental_form(c, &u, y, y).unwrap();
        let bxy = second_fundamental_form(c, &u, x, y).unwrap();
        let gauss = bxx.dot(&byy) - bxy.norm_squared();
        assert!((k - gauss).abs() < 1e-2);

        let p = c.point(&u);
        let h = mean_curvature(c, &u).unwrap();
        assert!((h.norm() - 1.0).abs() < 1e-6);
        assert!((h + &p).norm() < 1e-6);
    }
}

#[test]
fn levi_civita_is_torsion_free() {
    let sphere = OrthographicSphere::new(&DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]), 0.6, FdSteps::DEFAULT).unwrap();
    let c = &sphere.chart;
    let mut sampler = Sampler::new(6);
    for u in c.sample_points(&mut sampler, 6) {
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let (x, y) = (coordinate_field(c, i), coordinate_field(c, j));
            let torsion = levi_civita(c, &u, &x, &y).unwrap() - levi_civita(c, &u, &y, &x).unwrap()
                - lie_bracket(c, &u, &x, &y).unwrap();
            assert!(torsion.norm() < 1e-4);
        }
    }
}
