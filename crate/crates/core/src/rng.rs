//! Counter-keyed random streams.
//!
//! Every stream is a ChaCha8 generator seeded from a tuple of integers
//! (seed, pair index, direction, path index, ...), so a stream's contents do
//! not depend on the order in which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns an independent generator for the given key.
pub fn keyed_rng(key: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(key.len() as u64);
    for &k in key {
        state = splitmix64(state ^ splitmix64(k));
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Maps a lateral direction to a stream-key component.
pub fn direction_key(direction: i8) -> u64 {
    match direction {
        -1 => 1,
        1 => 2,
        _ => 0,
    }
}
