//! Seeded sample points. Every random choice in the crate goes through
//! [`Sampler`], so a seed fixes all checks and reports.

use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[allow(unused_imports)]
use num_traits::Float;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        self.rng.random_range(lo..hi)
    }

    pub fn complex(&mut self, re: (f64, f64), im: (f64, f64)) -> C64 {
        C64::new(self.real(re.0, re.1), self.real(im.0, im.1))
    }

    /// A point of the box at distance at least `min_dist` from every point
    /// of `avoid`; after many rejections the best candidate seen is returned.
    pub fn complex_avoiding(&mut self, re: (f64, f64), im: (f64, f64), avoid: &[C64], min_dist: f64) -> C64 {
        let mut best = (self.complex(re, im), -1.0);
        for _ in 0..500 {
            let z = self.complex(re, im);
            let d = avoid.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            if d >= min_dist {
                return z;
            }
            if d > best.1 {
                best = (z, d);
            }
        }
        best.0
    }

    /// Unit-modulus-scale complex coefficient for random combinations.
    pub fn coefficient(&mut self) -> C64 {
        C64::from_polar(self.real(0.5, 1.5), self.real(0.0, 2.0 * core::f64::consts::PI))
    }
}

impl Default for Sampler {
    fn default() -> Self {
        Self::new(DEFAULT_SEED)
    }
}
