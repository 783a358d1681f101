//! Seed expansion into independent named substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream domains derived from one user seed.
pub mod domain {
    pub const GENERATION: u64 = 1;
    pub const BISECTION: u64 = 2;
    pub const HIGH_DEGREE: u64 = 3;
    pub const EXPERIMENT: u64 = 4;
}

/// Deterministic generator for `(seed, domain, index)`; distinct triples give
/// independent streams.
pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}
