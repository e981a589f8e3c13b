//! Seed splitting.
//!
//! A single user seed drives every stochastic search. Each operation derives
//! its own stream as `seed + fnv1a(tag)` (wrapping), and restart `i` of that
//! operation uses `splitmix64(stream ^ i)`. Tags are fixed strings, so the
//! mapping is stable across runs and platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn fnv1a(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of the stream belonging to operation `tag`.
pub fn derive(seed: u64, tag: &str) -> u64 {
    seed.wrapping_add(fnv1a(tag))
}

/// Generator for restart `index` of the stream `stream`.
pub fn restart_rng(stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(stream ^ splitmix64(index)))
}
