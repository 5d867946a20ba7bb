//! Seeded random unimodular matrices.
//!
//! Samples are products `lens(c) * magnifier(a) * propagator(b)` with
//! `c, b` uniform in `[-2, 2]` and `a` uniform in `[0.5, 2]`, so every
//! sample is exactly unimodular and has `A > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::optics::RayMatrix;

#[derive(Debug, Clone)]
pub struct UnimodularSampler {
    rng: ChaCha8Rng,
    max_entry: f64,
}

impl UnimodularSampler {
    pub fn new(seed: u64) -> Self {
        UnimodularSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_entry: 2.0,
        }
    }

    /// Rejects samples with any `|entry|` above `bound`.
    pub fn with_max_entry(mut self, bound: f64) -> Self {
        self.max_entry = bound;
        self
    }

    fn candidate(&mut self) -> RayMatrix {
        let c = self.rng.gen_range(-2.0..=2.0);
        let a = self.rng.gen_range(0.5..=2.0);
        let b = self.rng.gen_range(-2.0..=2.0);
        // lens(c) * diag(a, 1/a) * prop(b), multiplied out
        RayMatrix::new(a, a * b, c * a, c * a * b + 1.0 / a)
            .expect("product of unimodular factors is unimodular")
    }

    pub fn sample(&mut self) -> RayMatrix {
        loop {
            let m = self.candidate();
            if m.max_abs_entry() <= self.max_entry {
                return m;
            }
        }
    }

    /// A sample whose `|B|` lies in `[lo, hi]`.
    pub fn sample_with_b(&mut self, lo: f64, hi: f64) -> RayMatrix {
        loop {
            let m = self.sample();
            if (lo..=hi).contains(&m.b().abs()) {
                return m;
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn pairs(&mut self, count: usize) -> Vec<(RayMatrix, RayMatrix)> {
        (0..count).map(|_| (self.sample(), self.sample())).collect()
    }
}
