//! Keyed random streams.
//!
//! Every random quantity in the library is drawn from a stream whose key is a
//! pure function of a master seed and a few integer coordinates (replicate,
//! lattice site, path index). Results therefore do not depend on evaluation
//! order, thread count, or on which other windows were sampled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Absorbs `word` into the running key `state`.
#[inline]
pub fn absorb(state: u64, word: u64) -> u64 {
    mix64(state.wrapping_add(GOLDEN_GAMMA) ^ mix64(word.wrapping_add(GOLDEN_GAMMA)))
}

/// FNV-1a over a label, used to fold experiment names into keys.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream key for `(master_seed, label, replicate)`.
pub fn derive_seed(master_seed: u64, label: &str, replicate: u64) -> u64 {
    let s = absorb(mix64(master_seed), label_hash(label));
    absorb(s, replicate)
}

/// Zig-zag encoding so negative lattice coordinates map to distinct words.
#[inline]
pub fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

/// A ChaCha8 generator positioned on stream `stream` of the key `key`.
///
/// ChaCha is counter based, so `(key, stream)` addresses an independent
/// sequence without any sequential state shared between streams.
pub fn stream_rng(key: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}
