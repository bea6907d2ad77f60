//! Counter-based exogenous noise.
//!
//! Simulation and counterfactual generation need noise that is a pure function
//! of `(seed, unit, node, draw)` rather than of evaluation order: units may be
//! simulated in parallel partitions, and the same unit's noise must be reusable
//! across intervened variants of a model so that factual and counterfactual
//! passes agree unit-by-unit. A sequential generator cannot offer that, so we
//! derive every draw independently with a splitmix64-style mixer.
//!
//! The derivation is fixed and documented so that results can be reproduced at
//! the distribution level by other implementations:
//!
//! * `mix64` is the splitmix64 finalizer: `z ^= z >> 30` then `z *= 0xBF58476D1CE4E5B9`,
//!   `z ^= z >> 27`, `z *= 0x94D049BB133111EB`, `z ^= z >> 31` (wrapping arithmetic).
//! * A draw key is built by absorbing words in order — `unit`, then
//!   `(node << 32) | draw` — each step computing
//!   `state = mix64(state + GOLDEN + word)` with `GOLDEN = 0x9E3779B97F4A7C15`
//!   and `state` seeded from the user seed.
//! * A 64-bit key maps to the open interval (0,1) via the top 53 bits:
//!   `u = ((key >> 11) + 0.5) / 2^53`, so `u` is never exactly 0 or 1.
//! * Standard normal draws use the Box–Muller transform on two uniforms with
//!   consecutive draw indices `d` and `d+1`:
//!   `z = sqrt(-2 ln u1) * cos(2π u2)` (the cosine branch only).
//!
//! The `node` index passed here must be stable under intervention; callers use
//! the node's rank in the lexicographically sorted node list, not its
//! topological position (which edge surgery can change).

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; bijective on u64, good avalanche behavior.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw 64-bit key for `(seed, unit, node, draw)`.
fn key(seed: u64, unit: u64, node: u32, draw: u32) -> u64 {
    let mut state = mix64(seed.wrapping_add(GOLDEN));
    state = mix64(state.wrapping_add(GOLDEN).wrapping_add(unit));
    let word = (u64::from(node) << 32) | u64::from(draw);
    mix64(state.wrapping_add(GOLDEN).wrapping_add(word))
}

/// Uniform draw in the open interval (0, 1).
pub fn uniform(seed: u64, unit: u64, node: u32, draw: u32) -> f64 {
    ((key(seed, unit, node, draw) >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal draw via Box–Muller on draw indices `draw` and `draw + 1`.
pub fn gaussian(seed: u64, unit: u64, node: u32, draw: u32) -> f64 {
    let u1 = uniform(seed, unit, node, draw);
    let u2 = uniform(seed, unit, node, draw + 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Derive a child seed, e.g. one per bootstrap replicate, from a base seed and
/// an index. Children are as independent as the mixer allows and do not collide
/// with simulation streams (the stream tag keeps the domains apart).
pub fn child_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let state = mix64(seed.wrapping_add(GOLDEN).wrapping_add(stream));
    mix64(state.wrapping_add(GOLDEN).wrapping_add(index))
}
