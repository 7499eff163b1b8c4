use nalgebra::{DMatrix, DVector, Matrix3};

use super::so3::is_special_orthogonal;
use crate::error::{invalid, Result};
use crate::linalg::{orthonormalize, projector};
use crate::quaternion::{block_diagonal, Quaternion};
use crate::report::{CheckReport, ResidualLog};

/// Which quaternion multiplication realizes the triple on `H^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// Left multiplication by `(i, j, k)`.
    Left,
    /// Right multiplication by `(i, k, j)`. Right multiplication reverses
    /// composition, so this order is the one with `J_1 J_2 = J_3`.
    Right,
}

impl Convention {
    pub fn label(self) -> &'static str {
        match self {
            Convention::Left => "left(i,j,k)",
            Convention::Right => "right(i,k,j)",
        }
    }
}

/// Three endomorphisms `(J_1, J_2, J_3)` of `R^N`, `N ≡ 0 mod 4`.
///
/// Construction only validates shapes. The quaternionic relations and metric
/// compatibility are properties checked by [`check_structure_axioms`] against
/// whichever metric the triple is meant for.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTriple {
    j: [DMatrix<f64>; 3],
}

impl StructureTriple {
    pub fn from_matrices(j: [DMatrix<f64>; 3]) -> Result<Self> {
        let n = j[0].nrows();
        if n == 0 || !n.is_multiple_of(4) {
            return invalid(format!("triple dimension {n} is not a positive multiple of 4"));
        }
        if j.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return invalid("triple matrices must be square and of equal size");
        }
        Ok(Self { j })
    }

    pub fn dim(&self) -> usize {
        self.j[0].nrows()
    }

    /// `J_{alpha+1}` (0-based index).
    pub fn get(&self, alpha: usize) -> &DMatrix<f64> {
        &self.j[alpha]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>; 3] {
        &self.j
    }

    pub fn into_matrices(self) -> [DMatrix<f64>; 3] {
        self.j
    }

    /// `Σ a_α J_α`.
    pub fn combination(&self, a: [f64; 3]) -> DMatrix<f64> {
        &self.j[0] * a[0] + &self.j[1] * a[1] + &self.j[2] * a[2]
    }
}

/// Quaternion multiplication operators on `H^m = R^{4m}`.
pub fn make_structure_triple(m: usize, convention: Convention) -> Result<StructureTriple> {
    if m < 1 {
        return invalid("quaternionic dimension must be at least 1");
    }
    let j = match convention {
        Convention::Left => [Quaternion::I, Quaternion::J, Quaternion::K]
            .map(|u| block_diagonal(&u.left_matrix(), m)),
        Convention::Right => [Quaternion::I, Quaternion::K, Quaternion::J]
            .map(|u| block_diagonal(&u.right_matrix(), m)),
    };
    StructureTriple::from_matrices(j)
}

/// Residuals of `J_α² = -Id`, `J_1 J_2 = -J_2 J_1 = J_3` and
/// `g(J_α X, J_α Y) = g(X, Y)`. The metric condition is sampled on all
/// pairs of standard basis vectors, which makes it exact for integer
/// matrices.
pub fn check_structure_axioms(
    t: &StructureTriple,
    metric: &DMatrix<f64>,
    tol: f64,
) -> Result<CheckReport> {
    let n = t.dim();
    if metric.nrows() != n || metric.ncols() != n {
        return invalid(format!(
            "metric is {}x{}, triple acts on R^{n}",
            metric.nrows(),
            metric.ncols()
        ));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut log = ResidualLog::new(
        "structure_axioms",
        "almost quaternionic structure with adapted metric",
        tol,
    );
    for (a, j) in t.matrices().iter().enumerate() {
        log.record(a, "square_plus_identity", (j * j + &id).amax());
    }
    let (j1, j2, j3) = (t.get(0), t.get(1), t.get(2));
    log.record(0, "j1j2_minus_j3", (j1 * j2 - j3).amax());
    log.record(0, "j2j1_plus_j3", (j2 * j1 + j3).amax());
    for (a, j) in t.matrices().iter().enumerate() {
        // g(J e_p, J e_q) - g(e_p, e_q) over all basis pairs
        let defect = j.transpose() * metric * j - metric;
        log.record(a, "metric_compatibility", defect.amax());
    }
    Ok(log.finish())
}

/// `J'_α = Σ_β c_{αβ} J_β` for `C ∈ SO(3)`.
pub fn so3_rotate(t: &StructureTriple, c: &Matrix3<f64>, tol: f64) -> Result<StructureTriple> {
    if !is_special_orthogonal(c, tol) {
        return invalid("basis change is not special orthogonal");
    }
    let j = [0, 1, 2].map(|a| t.combination([c[(a, 0)], c[(a, 1)], c[(a, 2)]]));
    StructureTriple::from_matrices(j)
}

/// Orthonormal basis of `Q(X) = span{X, J_1 X, J_2 X, J_3 X}`.
pub fn quaternionic_plane(t: &StructureTriple, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    if x.len() != t.dim() {
        return invalid("vector dimension does not match the triple");
    }
    let norm = x.norm();
    if !(norm > 0.0) {
        return invalid("quaternionic plane of the zero vector");
    }
    let mut spanning = vec![x.clone()];
    spanning.extend(t.matrices().iter().map(|j| j * x));
    Ok(orthonormalize(&spanning, 1e-9 * norm))
}

/// Whether `span{X, Y}` is half-quaternionic, i.e. `Q(X) = Q(Y)`, judged by
/// the max-norm distance of the two orthogonal projectors.
pub fn half_quaternionic(
    t: &StructureTriple,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: f64,
) -> Result<bool> {
    let px = projector(&quaternionic_plane(t, x)?, t.dim());
    let py = projector(&quaternionic_plane(t, y)?, t.dim());
    Ok((px - py).amax() < tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{axis_rotation, random_rotation};
    use crate::sampling::Sampler;

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn id(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn left_triple_acts_by_units() {
        let t = make_structure_triple(1, Convention::Left).unwrap();
        assert_eq!(t.get(0) * e(4, 0), e(4, 1));
        assert_eq!(t.get(0) * t.get(1) * e(4, 0), e(4, 3));
        assert_eq!(t.get(2) * e(4, 0), e(4, 3));
    }

    #[test]
    fn right_triple_ordering() {
        let t = make_structure_triple(1, Convention::Right).unwrap();
        assert_eq!(t.get(0) * t.get(1) * e(4, 0), t.get(2) * e(4, 0));

        // brute force over the naive order (i, j, k)
        let naive = [Quaternion::I, Quaternion::J, Quaternion::K].map(|u| {
            let m = u.right_matrix();
            DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
        });
        let defect = &naive[0] * &naive[1] - &naive[2];
        assert_eq!(defect.amax(), 2.0);
        let t = StructureTriple::from_matrices(naive).unwrap();
        let r = check_structure_axioms(&t, &id(4), 1e-10).unwrap();
        assert_eq!(r.component("j1j2_minus_j3"), Some(2.0));
        assert!(!r.passed());
    }

    #[test]
    fn constructed_triples_are_exact() {
        for m in 1..=3 {
            for conv in [Convention::Left, Convention::Right] {
                let t = make_structure_triple(m, conv).unwrap();
                let r = check_structure_axioms(&t, &id(4 * m), 1e-10).unwrap();
                assert_eq!(r.max_residual(), 0.0, "m={m} {conv:?}");
                assert!(t.matrices().iter().all(|j| j.iter().all(|v| [-1.0, 0.0, 1.0].contains(v))));
            }
        }
    }

    #[test]
    fn flipped_j3_fails_by_two() {
        let [a, b, c] = make_structure_triple(1, Convention::Left).unwrap().into_matrices();
        let t = StructureTriple::from_matrices([a, b, -c]).unwrap();
        let r = check_structure_axioms(&t, &id(4), 1e-10).unwrap();
        assert_eq!(r.component("j1j2_minus_j3"), Some(2.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_structure_triple(0, Convention::Left).is_err());
        let t = make_structure_triple(1, Convention::Left).unwrap();
        assert!(check_structure_axioms(&t, &id(8), 1e-10).is_err());
        assert!(quaternionic_plane(&t, &DVector::zeros(4)).is_err());
        assert!(StructureTriple::from_matrices([id(3), id(3), id(3)]).is_err());
    }

    #[test]
    fn so3_rotation_examples() {
        let t = make_structure_triple(2, Convention::Right).unwrap();
        assert_eq!(so3_rotate(&t, &Matrix3::identity(), 1e-10).unwrap(), t);

        let quarter = axis_rotation(0, std::f64::consts::FRAC_PI_2);
        let r = so3_rotate(&t, &quarter, 1e-10).unwrap();
        assert!((r.get(1) - t.get(2)).amax() < 1e-15);
        assert!((r.get(2) + t.get(1)).amax() < 1e-15);
        assert!(check_structure_axioms(&r, &id(8), 1e-10).unwrap().passed());

        let reflection = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -1.0));
        assert!(so3_rotate(&t, &reflection, 1e-10).is_err());
    }

    #[test]
    fn random_rotations_preserve_axioms() {
        let mut s = Sampler::new(42);
        for conv in [Convention::Left, Convention::Right] {
            let t = make_structure_triple(2, conv).unwrap();
            for _ in 0..100 {
                let c = random_rotation(&mut s);
                let r = so3_rotate(&t, &c, 1e-10).unwrap();
                let rep = check_structure_axioms(&r, &id(8), 1e-12).unwrap();
                assert!(rep.max_residual() < 1e-12, "{}", rep.max_residual());
            }
        }
    }

    #[test]
    fn quaternionic_plane_examples() {
        let t1 = make_structure_triple(1, Convention::Left).unwrap();
        assert_eq!(quaternionic_plane(&t1, &e(4, 0)).unwrap().len(), 4);
        assert!(half_quaternionic(&t1, &e(4, 0), &e(4, 1), 1e-9).unwrap());

        let t2 = make_structure_triple(2, Convention::Left).unwrap();
        assert!(!half_quaternionic(&t2, &e(8, 0), &e(8, 4), 1e-9).unwrap());
        let y = t2.get(1) * e(8, 0);
        assert_eq!(y, e(8, 2));
        assert!(half_quaternionic(&t2, &e(8, 0), &y, 1e-9).unwrap());
    }

    #[test]
    fn plane_is_stable_under_the_triple() {
        let mut s = Sampler::new(3);
        for conv in [Convention::Left, Convention::Right] {
            let t = make_structure_triple(3, conv).unwrap();
            for _ in 0..20 {
                let x = s.unit_vector(12);
                for j in t.matrices() {
                    assert!(half_quaternionic(&t, &x, &(j * &x), 1e-9).unwrap());
                }
            }
        }
    }
}
