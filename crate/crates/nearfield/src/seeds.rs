//! Deterministic seed derivation for Monte-Carlo work.
//!
//! Every random draw in the crate is keyed by an explicit `u64` seed. Sweeps
//! derive per-trial seeds from a base seed with a splittable counter scheme so
//! that results are independent of worker scheduling.

/// SplitMix64 finalizer; good avalanche, stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Streams keep seeds for different purposes disjoint even when the
/// (point, trial) counters coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scene = 1,
    Combiner = 2,
    Noise = 3,
    Aux = 4,
}

/// Derive a child seed from `base` for a given stream and (point, trial) pair.
pub fn derive(base: u64, stream: Stream, point: u64, trial: u64) -> u64 {
    let mut s = splitmix64(base ^ (stream as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    s = splitmix64(s ^ point.wrapping_mul(0xe703_7ed1_a0b4_28db));
    splitmix64(s ^ trial)
}
