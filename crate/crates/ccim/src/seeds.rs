//! Deterministic seed derivation.
//!
//! All stochastic state (mismatch draws, noise, trial inputs) descends from a
//! master seed through splitmix64 so runs are reproducible bit-for-bit and
//! independent of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One splitmix64 step: advances the state and returns the next output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    mix(*state)
}

/// splitmix64 finalizer (stateless full-avalanche hash).
fn mix(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a salt path, e.g.
/// `derive(master, &[unit, path, TAG])`. Every absorption step re-mixes, so
/// structured salt values (counters) cannot collide across nearby masters.
pub fn derive(master: u64, salts: &[u64]) -> u64 {
    let mut h = mix(master.wrapping_add(0x9e3779b97f4a7c15));
    for &salt in salts {
        h = mix(h ^ mix(salt.wrapping_add(0x9e3779b97f4a7c15)));
    }
    h
}

/// Deterministic generator for a derived seed path.
pub fn rng(master: u64, salts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, salts))
}
