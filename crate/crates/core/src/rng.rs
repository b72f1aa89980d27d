//! Seeded random streams.
//!
//! Every consumer draws from its own ChaCha8 stream keyed by `(seed, purpose)`,
//! so adding draws to one purpose never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Initial network parameters.
    Weights = 1,
    /// Dataset inputs.
    Data = 2,
    /// Ground-truth antecedent subsets and truth tables.
    Tables = 3,
    /// Minibatch order.
    Shuffle = 4,
    /// Test fixtures and verification sampling.
    Verify = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
