//! Seed derivation shared by every randomized routine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for restart `index` of a run seeded with `seed`.
///
/// Each restart reads its own ChaCha stream, so results do not depend on
/// the order in which restarts execute.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
