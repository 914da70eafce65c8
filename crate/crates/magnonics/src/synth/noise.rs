//! Seeded Gaussian deviates: ChaCha8 stream + Box–Muller transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard-normal sampler with a fixed, portable stream. The Box–Muller
/// transform yields pairs; the spare value is cached so every draw costs at
/// most one pair of uniforms.
pub struct GaussianSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// One standard-normal deviate.
    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = self.rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = self.rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
