//! Counter-based random streams keyed by `(seed, stream)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha8 generator for stream `stream` under master `seed`. Streams are
/// independent and random access, so results do not depend on how work is
/// split across threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Combines an experiment-level stream id with a per-item index.
pub fn substream(tag: u32, index: u64) -> u64 {
    ((tag as u64) << 40) ^ index
}
