//! Seed derivation.
//!
//! Every random stream in the crate is keyed by a 64-bit seed derived from a
//! parent seed and a label through the chain below, so results never depend on
//! generation order:
//!
//! ```text
//! derive(parent, label, index) = mix(mix(parent ^ fnv1a(label)) ^ index)
//! ```
//!
//! `mix` is the SplitMix64 finalizer and `fnv1a` the 64-bit FNV-1a hash of the
//! label's UTF-8 bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(parent: u64, label: &str, index: u64) -> u64 {
    mix(mix(parent ^ fnv1a(label.as_bytes())) ^ index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(parent: u64, label: &str, index: u64) -> ChaCha8Rng {
    rng(derive(parent, label, index))
}
