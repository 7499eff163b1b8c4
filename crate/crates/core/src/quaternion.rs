//! Real quaternions and their multiplication operators on `H^m = R^{4m}`.
//!
//! A quaternion `w + x i + y j + z k` is stored as the coordinate vector
//! `(w, x, y, z)`; `H^m` stacks `m` such blocks.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self::new(s[0], s[1], s[2], s[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    pub fn inverse(self) -> Self {
        self.conj() * (1.0 / self.norm_sqr())
    }

    /// Matrix of `x ↦ self · x` on `R^4`.
    pub fn left_matrix(self) -> Matrix4<f64> {
        let Quaternion { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, -z, y, //
            y, z, w, -x, //
            z, -y, x, w,
        )
    }

    /// Matrix of `x ↦ x · self` on `R^4`.
    pub fn right_matrix(self) -> Matrix4<f64> {
        let Quaternion { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, z, -y, //
            y, -z, w, x, //
            z, y, -x, w,
        )
    }

    /// Rotation of the imaginary part under `v ↦ self · v · self⁻¹`, in the
    /// `(i, j, k)` basis. Only meaningful for nonzero quaternions.
    pub fn rotation_matrix(self) -> Matrix3<f64> {
        let q = self.normalized();
        let inv = q.conj();
        let mut r = Matrix3::zeros();
        for (col, unit) in [Self::I, Self::J, Self::K].into_iter().enumerate() {
            let img = q * unit * inv;
            r[(0, col)] = img.x;
            r[(1, col)] = img.y;
            r[(2, col)] = img.z;
        }
        r
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

/// Block-diagonal operator on `H^m` applying `block` to every quaternion
/// coordinate.
pub fn block_diagonal(block: &Matrix4<f64>, m: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(4 * m, 4 * m);
    for b in 0..m {
        out.view_mut((4 * b, 4 * b), (4, 4)).copy_from(block);
    }
    out
}

/// Splits a vector of `R^{4m}` into its quaternion coordinates.
pub fn split_blocks(v: &DVector<f64>) -> Vec<Quaternion> {
    v.as_slice().chunks_exact(4).map(Quaternion::from_slice).collect()
}

pub fn join_blocks(qs: &[Quaternion]) -> DVector<f64> {
    DVector::from_iterator(4 * qs.len(), qs.iter().flat_map(|q| q.to_array()))
}

/// Right-multiplies every quaternion coordinate of `v` by `lambda`.
pub fn right_act(v: &DVector<f64>, lambda: Quaternion) -> DVector<f64> {
    let blocks: Vec<_> = split_blocks(v).into_iter().map(|q| q * lambda).collect();
    join_blocks(&blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;

    fn v(q: Quaternion) -> Vector4<f64> {
        Vector4::new(q.w, q.x, q.y, q.z)
    }

    #[test]
    fn unit_products() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
    }

    #[test]
    fn multiplication_matrices_agree_with_product() {
        let a = Quaternion::new(0.3, -1.2, 0.7, 2.0);
        let b = Quaternion::new(-0.5, 0.4, 1.1, -0.9);
        assert!((a.left_matrix() * v(b) - v(a * b)).amax() < 1e-15);
        assert!((b.right_matrix() * v(a) - v(a * b)).amax() < 1e-15);
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let r = Quaternion::new(0.2, 0.9, -0.4, 0.3).rotation_matrix();
        assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }
}
