//! Counter-style random streams.
//!
//! Every random decision in the crate draws from a ChaCha stream whose key
//! is derived from a domain tag and the run seed, and whose 64-bit stream id
//! encodes the position (epoch, sample index, ...). Two draws with the same
//! (domain, seed, position) are identical no matter which thread asks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn derive_rng(domain: &str, seed: u64, stream: u64) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"matrec/");
    hasher.update(domain.as_bytes());
    hasher.update(seed.to_le_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Per-sample stream for augmentation and illumination draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleRng {
    pub seed: u64,
    pub epoch: u32,
    pub index: u32,
}

impl SampleRng {
    pub fn new(seed: u64, epoch: u32, index: u32) -> Self {
        SampleRng { seed, epoch, index }
    }

    pub fn stream(&self) -> StreamRng {
        derive_rng(
            "sample",
            self.seed,
            (u64::from(self.epoch) << 32) | u64::from(self.index),
        )
    }
}
