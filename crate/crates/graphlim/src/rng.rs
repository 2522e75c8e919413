//! Seeded randomness.
//!
//! All stochastic operations take an explicit `u64` seed and use ChaCha8,
//! a counter-based generator with 2^64 independent streams. Worker-level
//! parallelism derives one stream per trial/restart/sample index, so
//! results never depend on the number of workers or on scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Root generator for a seed (stream 0).
pub fn root(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `index` of the job with `seed`.
/// Stream ids start at 1 so the root stream is never reused.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
