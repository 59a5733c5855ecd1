//! Per-task deterministic random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::C64;
use crate::math::{cis, sqrt, TAU};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, a, b)`; results never depend on scheduling order.
pub fn task_rng(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b.wrapping_mul(0xA24B_AED4_963E_E407));
    ChaCha8Rng::seed_from_u64(s)
}

/// Uniform sample from the closed complex disc of the given radius.
pub fn complex_in_disc<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * sqrt(rng.random::<f64>());
    cis(TAU * rng.random::<f64>()) * r
}
