//! Reproducible random substreams.
//!
//! Every random computation in the crate that can be sharded draws from a
//! substream derived from a master seed, a purpose tag and a shard index:
//!
//! ```text
//! seed(master, tag, shard) = mix64(mix64(master ^ fnv1a64(tag)) + shard * 0x9E3779B97F4A7C15)
//! ```
//!
//! where `mix64` is the SplitMix64 finaliser and `fnv1a64` is 64-bit FNV-1a
//! over the UTF-8 bytes of the tag. The resulting `u64` seeds a
//! [`ChaCha8Rng`] through `SeedableRng::seed_from_u64`. Output therefore
//! depends only on `(master, tag, shard layout)`, never on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Draws per shard used by every sharded sampler in the crate.
pub const SHARD_SIZE: usize = 1 << 16;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub fn substream_seed(master: u64, tag: &str, shard: u64) -> u64 {
    mix64(mix64(master ^ fnv1a64(tag.as_bytes())).wrapping_add(shard.wrapping_mul(GOLDEN)))
}

pub fn substream(master: u64, tag: &str, shard: u64) -> StreamRng {
    StreamRng::seed_from_u64(substream_seed(master, tag, shard))
}

/// Splits `count` draws into fixed-size shards: `(shard index, draws)`.
pub fn shard_layout(count: usize) -> Vec<(u64, usize)> {
    (0..count.div_ceil(SHARD_SIZE))
        .map(|s| (s as u64, SHARD_SIZE.min(count - s * SHARD_SIZE)))
        .collect()
}

/// Worker cap from `STAIRCASE_DP_THREADS`; `None` when unset or invalid.
pub fn thread_cap() -> Option<usize> {
    std::env::var("STAIRCASE_DP_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` inside a rayon pool honouring [`thread_cap`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, "draws", 0).random();
        let b: u64 = substream(7, "draws", 0).random();
        let c: u64 = substream(7, "draws", 1).random();
        let d: u64 = substream(7, "pairs", 0).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn fixed_seed_derivation() {
        // Pinned so other implementations can reproduce the stream layout.
        assert_eq!(fnv1a64(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xAF63_DC4C_8601_EC8C);
        assert_eq!(mix64(0), 0);
    }

    #[test]
    fn shard_layout_covers_count() {
        assert!(shard_layout(0).is_empty());
        let l = shard_layout(SHARD_SIZE * 2 + 5);
        assert_eq!(l.len(), 3);
        assert_eq!(l.iter().map(|s| s.1).sum::<usize>(), SHARD_SIZE * 2 + 5);
        assert_eq!(l[2], (2, 5));
    }
}
