//! Counter-style seeding: instance `i` of a randomized suite always draws from
//! stream `i` of the suite seed, whichever worker runs it.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub const DEFAULT_SEED: u64 = 0;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
