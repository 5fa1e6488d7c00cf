//! Counted, splittable random streams.
//!
//! A run is driven by one 64-bit seed; restart `k` of any search draws from
//! stream `k` of that seed, so the numbers a restart sees do not depend on
//! which thread ran it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, for handing a sub-computation its own family of
/// streams.
pub fn child_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = stream(seed ^ 0x9e37_79b9_7f4a_7c15, tag);
    rng.gen()
}

pub fn standard_normal(rng: &mut StreamRng) -> f64 {
    // Box-Muller; u1 kept away from zero.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gaussian_vector(rng: &mut StreamRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| standard_normal(rng)).collect()
}

pub fn uniform_vector(rng: &mut StreamRng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..hi)).collect()
}
