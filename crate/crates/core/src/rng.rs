//! Seeded randomness.
//!
//! Every random draw in the crate comes from PCG-XSL-RR 128/64 (`Pcg64`), a
//! permuted congruential generator with a fully specified output function,
//! so a 64-bit seed reproduces the same stream on every platform.

use rand::SeedableRng;
pub use rand_pcg::Pcg64;

/// The generator for `seed`.
pub fn seeded(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

/// An independent generator for sub-task `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Pcg64 {
    // splitmix64 finalizer decorrelates nearby (seed, stream) pairs
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    Pcg64::seed_from_u64(z ^ (z >> 31))
}
