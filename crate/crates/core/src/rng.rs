//! Seeded, splittable random streams.
//!
//! Uniform generator contract: a stream `(master_seed, stream_index)` is a
//! ChaCha8 generator seeded with `ChaCha8Rng::seed_from_u64(master_seed)`
//! and switched to ChaCha stream `stream_index`. Uniforms on the open
//! interval `(0,1)` are `((u >> 11) + 0.5) · 2⁻⁵³` for each 64-bit output
//! `u`. Standard normals are the inverse normal CDF of one uniform.
//!
//! Child streams come from [`RngStream::split`]: the parent pair is mixed
//! with SplitMix64 into a fresh master seed and the child index becomes the
//! ChaCha stream. Replicate `r` of an estimator always uses `split(r)`, so
//! results do not depend on thread scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Independent child stream number `k`; does not advance `self`.
    pub fn split(&self, k: u64) -> RngStream {
        let seed = splitmix64(self.master_seed ^ splitmix64(self.stream_index ^ 0xA076_1D64_78BD_642F));
        RngStream::new(seed, k)
    }

    /// Uniform draw on the open interval `(0,1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw by inverse-CDF transform.
    pub fn normal(&mut self) -> f64 {
        standard_normal().inverse_cdf(self.uniform())
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        let nd = standard_normal();
        for v in out {
            *v = nd.inverse_cdf(self.uniform());
        }
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
