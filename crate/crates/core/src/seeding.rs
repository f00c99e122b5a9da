//! Deterministic RNG streams keyed by domain-separated hashes.
//!
//! Every stochastic component in the crate draws from a ChaCha stream seeded
//! by a SHA-256 digest of length-prefixed parts, so results are reproducible
//! bit-for-bit across runs and platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Builds a ChaCha RNG keyed by the given byte parts.
///
/// Parts are length-prefixed before hashing so `["ab", "c"]` and `["a", "bc"]`
/// produce distinct streams.
pub(crate) fn stream_rng(parts: &[&[u8]]) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(seed)
}
