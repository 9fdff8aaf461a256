//! Seeded, counter-based standard-normal streams.
//!
//! Stream `s` of seed `σ` is ChaCha20 keyed by `σ` with stream id `s`, so
//! sample `s` can be regenerated on its own without drawing the samples
//! before it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Identifier recorded alongside generated samples.
pub const GENERATOR_ID: &str = "chacha20-stream-per-sample+ziggurat-standard-normal";

/// `n` independent `N(0, 1)` draws from stream `stream` of `seed`.
pub fn standard_normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}
