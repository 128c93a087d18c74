//! Keyed random streams.
//!
//! Every random draw in the library comes from a ChaCha generator keyed by
//! `(seed, domain, a, b)`, so which thread consumes a stream never changes
//! its values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains.
pub mod domain {
    pub const INIT: u64 = 1;
    pub const TRAIN_STEP: u64 = 2;
    pub const TRAIN_SAMPLE: u64 = 3;
    pub const GENERATE: u64 = 4;
    pub const DATASET: u64 = 5;
    pub const SPLIT: u64 = 6;
    pub const SELF_CHECK: u64 = 7;
}

pub fn stream(seed: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (i, word) in [seed, domain, a, b].iter().enumerate() {
        key[8 * i..8 * i + 8].copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_keyed() {
        let x: u64 = stream(1, 2, 3, 4).gen();
        assert_eq!(x, stream(1, 2, 3, 4).gen::<u64>());
        assert_ne!(x, stream(1, 2, 3, 5).gen::<u64>());
        assert_ne!(x, stream(2, 2, 3, 4).gen::<u64>());
    }
}
