//! Seeded random streams.
//!
//! Every chain owns a ChaCha8 stream; replicas of one configuration share the
//! seed and differ by stream id, so no two replicas ever overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

pub fn stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream number `replica` for the given seed.
pub fn replica_stream(seed: u64, replica: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}
