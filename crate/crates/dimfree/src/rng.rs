//! Counter-based random-number streams.
//!
//! Every draw in the crate is keyed by a `(seed, stream, index)` triple: the
//! triple is hashed into a ChaCha8 key, so the matrix produced for a given
//! triple is bit-identical no matter which thread asks for it or in which
//! order. This is what makes the parallel Monte-Carlo loops reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanching for key derivation.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed, e.g. one per summand or per repeat.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(mix(master) ^ stream.wrapping_mul(0xa076_1d64_78bd_642f))
}

/// Deterministic generator for the `(seed, stream, index)` triple.
pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = mix(seed);
    state = mix(state ^ stream.wrapping_mul(0xa076_1d64_78bd_642f));
    state = mix(state ^ index.wrapping_mul(0xe703_7ed1_a0b4_28db));
    for chunk in key.chunks_exact_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
