//! Splittable, counter-based random number streams.
//!
//! Every random draw in the crate comes from a ChaCha stream addressed by
//! `(seed, stream)`. Streams with the same seed but different stream ids
//! are statistically independent, so parallel sweeps can hand out one
//! stream per unit of work and stay bit-reproducible regardless of
//! scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream id reserved for drawing item sizes at catalog build time.
pub const STREAM_SIZES: u64 = 0xC0DE_0001;
/// Base stream id for request sampling; add the run index for sweeps.
pub const STREAM_REQUESTS: u64 = 0;

/// Returns the RNG for a given `(seed, stream)` address.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
