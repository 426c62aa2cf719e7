//! Stable seed derivation.
//!
//! Every stochastic run gets its own seed, computed from the master seed and
//! the run's coordinates with a fixed 64-bit mixer, so results do not depend
//! on how work is scheduled:
//!
//! ```text
//! h = splitmix64(master)
//! for each coordinate c:  h = splitmix64(h ^ c)
//! ```
//!
//! Text identifiers (scheme names) enter as their FNV-1a 64-bit hash.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix64(master), |h, &c| splitmix64(h ^ c))
}

pub fn rng_for(master: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, coords))
}
