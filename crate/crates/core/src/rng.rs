//! Seeded random sub-streams.
//!
//! Every random draw in the crate comes from one master seed. Each consumer
//! gets its own ChaCha stream so that changing how one stage consumes
//! randomness never shifts the numbers another stage sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Centers = 1,
    Ties = 2,
    Init = 3,
    Shuffle = 4,
    Synth = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
