//! Counter-based seed derivation.
//!
//! Every random draw in the crate comes from a [`RandomSeed`]: a master seed
//! shared by a whole experiment plus a stream index. Streams are derived by
//! mixing, never by advancing a shared generator, so results do not depend on
//! how replicas are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub master: u64,
    pub stream: u64,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSeed {
    pub fn new(master: u64) -> Self {
        RandomSeed { master, stream: 0 }
    }

    pub fn with_stream(master: u64, stream: u64) -> Self {
        RandomSeed { master, stream }
    }

    /// Derives an independent child stream, e.g. one per replica or per
    /// purpose (weights vs. edges) inside a replica.
    pub fn child(&self, tag: u64) -> Self {
        RandomSeed {
            master: self.master,
            stream: mix64(self.stream ^ mix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.master;
        for chunk in key.chunks_exact_mut(8) {
            state = mix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }
}
