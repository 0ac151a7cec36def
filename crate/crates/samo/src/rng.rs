//! Seed derivation for the per-concern RNG streams.
//!
//! Every source of randomness in a run (environment resets, policy noise,
//! buffer sampling, parameter init, rollouts) draws from its own stream,
//! derived from the run seed, a concern tag and the option index. Streams
//! never interleave, so toggling one feature cannot shift the draws of
//! another.

use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Concern tags for stream derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Episode seeds handed to `Environment::reset`.
    Env,
    /// Policy sampling noise (training and delegation).
    Policy,
    /// Replay/pool minibatch sampling.
    Buffer,
    /// Network parameter initialization.
    Init,
    /// Post-freeze composite rollouts.
    Rollout,
    /// Budget-filling rollouts after the last option.
    Filler,
    /// Greedy/stochastic evaluation episodes.
    Eval,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Env => 0x01,
            Stream::Policy => 0x02,
            Stream::Buffer => 0x03,
            Stream::Init => 0x04,
            Stream::Rollout => 0x05,
            Stream::Filler => 0x06,
            Stream::Eval => 0x07,
        }
    }
}

/// SplitMix64 step; stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the RNG for `(run_seed, stream, option index)`.
pub fn stream_rng(run_seed: u64, stream: Stream, option_idx: usize) -> ChaCha8Rng {
    let mixed = splitmix64(
        splitmix64(run_seed ^ stream.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15))
            ^ (option_idx as u64).wrapping_mul(0xd1b5_4a32_d192_ed03),
    );
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Draws a fresh sub-seed (for episode resets) from a stream.
pub fn next_seed(rng: &mut ChaCha8Rng) -> u64 {
    use rand::RngCore;
    rng.next_u64()
}
