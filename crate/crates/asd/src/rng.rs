//! Deterministic stream derivation for reproducible experiments.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built by
//! [`substream`], so a `(base seed, tag path)` pair names the same byte
//! stream on every platform. Experiment code reserves tag slots as
//! `[run, policy, purpose]`; tag 0 in the policy slot is the shared
//! environment draw of a run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tag for a run's environment draw (parameters, pool, graph, factors).
pub const STREAM_ENV: u64 = 0;
/// Purpose tag for label noise within an episode.
pub const PURPOSE_NOISE: u64 = 0;
/// Purpose tag for a policy's internal randomness within an episode.
pub const PURPOSE_POLICY: u64 = 1;

/// Derive an independent RNG from a base seed and up to three tags.
///
/// The seed and tags are packed into disjoint 8-byte words of the ChaCha
/// seed, so distinct tag paths can never collide.
pub fn substream(base_seed: u64, tags: &[u64]) -> ChaCha8Rng {
    assert!(tags.len() <= 3, "substream supports at most three tags");
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base_seed.to_le_bytes());
    for (slot, tag) in tags.iter().enumerate() {
        let at = 8 * (slot + 1);
        seed[at..at + 8].copy_from_slice(&tag.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
