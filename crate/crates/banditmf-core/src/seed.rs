//! Deterministic seed derivation and small sampling helpers.
//!
//! Every randomized stage derives its own seed from one master seed plus a
//! stage label, so that adding or reordering stages never perturbs the
//! random stream of another stage.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates structurally similar inputs.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a stage seed from a master seed and a stage label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed into the master seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(master ^ h)
}

/// Derives a seed for the `index`-th repetition of a labelled stage
/// (restart, seed sweep, per-user session, ...).
pub fn derive_indexed_seed(master: u64, label: &str, index: u64) -> u64 {
    splitmix(derive_seed(master, label) ^ splitmix(index))
}

/// Builds the stream cipher RNG used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// In-place Fisher-Yates shuffle.
///
/// Hand-rolled so the byte-level stream (and thus every seeded experiment)
/// does not depend on library implementation details.
pub fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Samples `count` distinct indices from `0..n` (partial Fisher-Yates).
///
/// # Panics
/// Panics if `count > n`.
pub fn sample_distinct(n: usize, count: usize, rng: &mut ChaCha8Rng) -> alloc::vec::Vec<usize> {
    assert!(count <= n, "cannot sample {count} distinct values from 0..{n}");
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}
