//! Seeded, portable uniform generator for reproducible starts.
//!
//! ChaCha8 with 53-bit mantissa draws: the same seed yields bitwise-identical
//! factors on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

pub struct PortableUniform {
    rng: ChaCha8Rng,
}

impl PortableUniform {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in [0,1) from the top 53 bits of a ChaCha word pair.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_scalar<T: Scalar>(&mut self) -> T {
        T::from_f64_const(self.next_f64())
    }

    /// Standard normal via Box-Muller on the portable uniform stream.
    pub fn next_normal(&mut self) -> f64 {
        let mut u1 = self.next_f64();
        if u1 == 0.0 {
            u1 = f64::MIN_POSITIVE;
        }
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
