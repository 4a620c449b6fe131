//! Seeded randomness: one master seed, named substreams, explicit sampling.
//!
//! Every stochastic step in the crate draws from a ChaCha8 stream derived
//! from the master seed plus a substream label, so results are reproducible
//! at any thread count. Sampling primitives (uniform reals, bounded
//! integers, shuffles, Pareto draws) are spelled out here rather than taken
//! from a sampling crate, so the exact byte-to-sample mapping is fixed by
//! this file and can be replicated outside it.

pub use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier recorded in fold plans: Fisher-Yates shuffle driven by a
/// ChaCha8 stream, with the substream derivation in [`substream_seed`].
pub const RNG_ALGORITHM: &str = "fisher-yates/chacha8";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; bijective on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    h
}

/// Stable 64-bit seed for the substream named `label` with ordinal `index`.
pub fn substream_seed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(
        splitmix64(master)
            .wrapping_add(fnv1a(label))
            .wrapping_add(splitmix64(index)),
    )
}

/// Fresh generator for the named substream.
pub fn substream(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, label, index))
}

/// Uniform draw in [0, 1) with 53 random bits.
pub fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in [lo, hi).
pub fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform_f64(rng)
}

/// Unbiased uniform integer in [0, bound) via multiply-shift with rejection;
/// `bound` must be positive.
pub fn uniform_index(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(bound);
        if m as u64 >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// In-place Fisher-Yates shuffle; consumes one `uniform_index` draw per
/// element from the back, so the permutation depends only on the stream and
/// the slice length.
pub fn shuffle<T>(rng: &mut ChaCha8Rng, slice: &mut [T]) {
    for i in (1..slice.len()).rev() {
        let j = uniform_index(rng, (i + 1) as u64) as usize;
        slice.swap(i, j);
    }
}

/// Pareto draw with minimum `x_min` and tail exponent `gamma` (density
/// exponent, > 2 for a finite mean), via the inverse CDF
/// `x_min * (1 - u)^(-1 / (gamma - 1))`.
pub fn pareto(rng: &mut ChaCha8Rng, x_min: f64, gamma: f64) -> f64 {
    let u = uniform_f64(rng);
    x_min * (1.0 - u).powf(-1.0 / (gamma - 1.0))
}
