//! Seeded random draws shared by the synthetic generator and the
//! multistart fitter.
//!
//! ChaCha8 gives portable, platform-independent streams; uniforms come
//! straight from the top 53 bits of each word, and normals from the polar
//! Box–Muller transform. Bit-exactness across *other* implementations is
//! explicitly not a goal — only determinism within this one.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub(crate) fn seeded(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform draw in `[0, 1)`.
    pub(crate) fn uniform(&mut self) -> f64 {
        // 53 high bits -> the full lattice of representable doubles in [0, 1)
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard normal draw (polar Box–Muller, second value cached).
    pub(crate) fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_per_seed() {
        let mut a = Gaussian::seeded(42);
        let mut b = Gaussian::seeded(42);
        for _ in 0..100 {
            assert_eq!(a.normal(), b.normal());
        }
        let mut c = Gaussian::seeded(43);
        assert_ne!(a.normal(), c.normal());
    }

    #[test]
    fn normal_moments_are_sane() {
        let mut g = Gaussian::seeded(7);
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = g.normal();
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
