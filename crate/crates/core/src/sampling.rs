//! Deterministic sampling.
//!
//! All samples come from a ChaCha8 stream seeded with a `u64`. Scalars are
//! drawn uniformly from `[-1, 1)`; directions are uniform cubes normalized to
//! unit length. Points are drawn uniformly from a box and rejected until they
//! land inside the optional radius. Given the same seed and the same call
//! sequence the sample stream is bit-identical across runs and platforms.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Point/vector counts plus the seed that generates them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub points: usize,
    pub vectors: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(points: usize, vectors: usize, seed: u64) -> Self {
        Self {
            points,
            vectors,
            seed,
        }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.seed)
    }
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self::new(32, 8, 42)
    }
}

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn scalar(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    pub fn vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.scalar())
    }

    pub fn unit_vector(&mut self, n: usize) -> DVector<f64> {
        loop {
            let v = self.vector(n);
            let norm = v.norm();
            if norm > 1e-3 {
                return v / norm;
            }
        }
    }

    /// Uniform point in the box `center ± half_width`, restricted to
    /// `|x - center| <= radius` when a radius is given.
    pub fn point_in(
        &mut self,
        center: &DVector<f64>,
        half_width: &DVector<f64>,
        radius: Option<f64>,
    ) -> DVector<f64> {
        loop {
            let offset = DVector::from_fn(center.len(), |i, _| half_width[i] * self.scalar());
            if radius.is_none_or(|r| offset.norm() <= r) {
                return center + offset;
            }
        }
    }
}
