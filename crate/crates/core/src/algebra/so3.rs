use nalgebra::Matrix3;

use crate::quaternion::Quaternion;
use crate::sampling::Sampler;

/// Generator `L_a` of rotations about axis `a` (0-based), oriented so that
/// `exp(t L_0)` maps the second basis vector towards the third:
/// `d/dt e_2 = e_3`, `d/dt e_3 = -e_2` on rows.
pub fn so3_generator(axis: usize) -> Matrix3<f64> {
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut l = Matrix3::zeros();
    l[(b, c)] = 1.0;
    l[(c, b)] = -1.0;
    l
}

/// `exp(angle · L_axis)`.
pub fn axis_rotation(axis: usize, angle: f64) -> Matrix3<f64> {
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    let (s, co) = angle.sin_cos();
    let mut r = Matrix3::identity();
    r[(b, b)] = co;
    r[(c, c)] = co;
    r[(b, c)] = s;
    r[(c, b)] = -s;
    r
}

/// Rotation drawn by conjugation with a normalized random quaternion.
pub fn random_rotation(sampler: &mut Sampler) -> Matrix3<f64> {
    loop {
        let q = Quaternion::new(
            sampler.scalar(),
            sampler.scalar(),
            sampler.scalar(),
            sampler.scalar(),
        );
        if q.norm() > 1e-3 {
            return q.rotation_matrix();
        }
    }
}

pub fn is_special_orthogonal(c: &Matrix3<f64>, tol: f64) -> bool {
    (c.transpose() * c - Matrix3::identity()).amax() < tol && (c.determinant() - 1.0).abs() < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_matches_exponential() {
        let t = 1e-6;
        for axis in 0..3 {
            let d = (axis_rotation(axis, t) - axis_rotation(axis, -t)) / (2.0 * t);
            assert!((d - so3_generator(axis)).amax() < 1e-9);
        }
    }
}
