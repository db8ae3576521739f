//! Per-sample random streams split from a root seed.
//!
//! Sample `i` of a run with seed `s` always draws from ChaCha8 keyed by
//! `s` on stream `i`, so results do not depend on thread count or
//! scheduling, and any sample can be replayed on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw from `(lo, hi]`.
pub fn uniform_left_open<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    hi - (hi - lo) * u
}
