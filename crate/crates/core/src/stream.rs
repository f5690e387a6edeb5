//! Hierarchically seeded random streams.
//!
//! Every random draw in the simulator comes from a [`RandomStream`] obtained
//! through [`derive_stream`]. A stream is addressed by a master seed plus a
//! path of integers (for example `[sweep_point, realization, purpose]`), so
//! a given realization always sees the same numbers no matter which thread
//! evaluates it or in what order.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Purpose tags used as the last element of a stream path.
pub mod purpose {
    pub const POSITIONS: u64 = 0;
    pub const SHADOWING: u64 = 1;
    pub const FADING: u64 = 2;
    pub const POINT_SEED: u64 = 3;
}

/// A deterministic pseudo-random stream (ChaCha12 keyed by a path digest).
#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha12Rng);

impl RandomStream {
    /// Stream seeded directly from a 64-bit value, for tests and one-off use.
    pub fn from_seed_u64(seed: u64) -> Self {
        derive_stream(seed, &[])
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Derives an independent stream from `(master_seed, path)`.
///
/// The key is the SHA-256 digest of a length-prefixed little-endian encoding
/// of the seed and path, so `[0, 1]`, `[1, 0]` and `[0, 1, 0]` all map to
/// unrelated keys.
pub fn derive_stream(master_seed: u64, path: &[u64]) -> RandomStream {
    let mut hasher = Sha256::new();
    hasher.update(b"dmimo-outage/stream/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update((path.len() as u64).to_le_bytes());
    for p in path {
        hasher.update(p.to_le_bytes());
    }
    let key: [u8; 32] = hasher.finalize().into();
    RandomStream(ChaCha12Rng::from_seed(key))
}

/// Derives a child seed, used when a sweep hands each point its own master seed.
pub fn derive_seed(master_seed: u64, path: &[u64]) -> u64 {
    let mut full = path.to_vec();
    full.push(purpose::POINT_SEED);
    derive_stream(master_seed, &full).next_u64()
}
