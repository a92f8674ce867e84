//! Seeded random streams with deterministic child derivation.
//!
//! Every randomized stage takes an explicit [`RngStream`]. A stream remembers
//! the seed it was built from, and child streams are derived as a pure
//! function of `(seed, tags)`, so any stage of a run can be reproduced in
//! isolation without replaying the stages before it.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; used only to spread seed material, not as the
/// generator itself.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A reproducible random stream (ChaCha-based, stable across platforms).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was constructed from. Unaffected by draws.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive a child stream from this stream's seed and a tag path.
    ///
    /// Pure function of `(self.seed(), tags)`: it neither reads nor advances
    /// the parent stream's state, and the same tags always yield the same
    /// child. Tag order matters.
    pub fn derive(&self, tags: &[u64]) -> RngStream {
        let mut s = self.seed;
        for (i, &t) in tags.iter().enumerate() {
            s = splitmix64(s ^ splitmix64(t.wrapping_add(i as u64 + 1)));
        }
        RngStream::new(s)
    }

    /// Uniform draw from `0..n`. Panics if `n == 0`.
    pub fn pick(&mut self, n: usize) -> usize {
        assert!(n > 0, "pick() requires a non-empty range");
        rand::Rng::random_range(&mut self.rng, 0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
