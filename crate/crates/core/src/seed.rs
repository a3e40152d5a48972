//! Pinned random-number plumbing.
//!
//! Every seeded routine in the crate draws from ChaCha12 (`rand_chacha`)
//! keyed by `seed_from_u64`, and converts raw 64-bit outputs to the values
//! it needs with the helpers below rather than with distribution types whose
//! algorithms may change between `rand` releases.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

pub fn rng(seed: u64) -> SimRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Generator for the `stream`-th independent substream of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer applied to `seed ^ tag`; used to give each stage of
/// a pipeline its own seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = (seed ^ tag).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform integer in `[0, bound)` by rejection of the low zone.
pub fn below<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let x = rng.next_u64();
        if x >= threshold {
            return x % bound;
        }
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform in `[0, 1)` with 53 random bits.
pub fn unit_closed_open<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * INV_2_53
}

/// Uniform in `(0, 1]` with 53 random bits.
pub fn unit_open_closed<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * INV_2_53
}

/// Two independent standard normals by the basic Box-Muller transform.
pub fn box_muller<R: RngCore>(rng: &mut R) -> (f64, f64) {
    let u1 = unit_open_closed(rng);
    let u2 = unit_closed_open(rng);
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (radius * angle.cos(), radius * angle.sin())
}
