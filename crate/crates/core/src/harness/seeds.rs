//! Independent random streams keyed by `(seed, trial, purpose)`.
//!
//! Every trial owns one stream per purpose, so results do not depend on how
//! trials are spread over threads. Points of one experiment share the
//! master seed and therefore see the same instances, known sets and noise
//! draws trial by trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Instance,
    Subset,
    Noise,
    Policy,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Instance => 0x1,
            Purpose::Subset => 0x2,
            Purpose::Noise => 0x3,
            Purpose::Policy => 0x4,
        }
    }
}

/// Trial index used for an instance drawn once and shared by all trials.
pub const SHARED_TRIAL: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_key(seed: u64, trial: u64, purpose: Purpose) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ purpose.tag())
}

pub fn stream(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, trial, purpose))
}
