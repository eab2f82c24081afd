//! Deterministic random-number streams.
//!
//! Every stochastic routine in this crate draws from a [`ChaCha8Rng`] stream
//! derived from a master seed and a *stream label*. Labels encode structural
//! position (for the samplers: the path of a component in the exploration
//! tree; for experiments: the sample index), so
//!
//! * the same seed always reproduces the same output bit-for-bit, and
//! * the stream consumed inside one component does not depend on how much
//!   randomness sibling components consumed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A label identifying one independent random stream.
///
/// Component paths are sequences of child indices in the exploration tree;
/// ad-hoc streams (rejection rounds, experiment replicates) append their
/// indices the same way.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct StreamId(pub Vec<u32>);

impl StreamId {
    /// The root stream.
    pub fn root() -> Self {
        StreamId(Vec::new())
    }

    /// The `i`-th child stream of this one.
    pub fn child(&self, i: u32) -> Self {
        let mut path = self.0.clone();
        path.push(i);
        StreamId(path)
    }
}

/// Derives a 64-bit stream seed from the master seed and a stream label.
///
/// Uses an FNV-1a-style mix followed by a finalizer; this is not
/// cryptographic, it only needs to decorrelate nearby labels, and it is
/// platform-independent (no hasher randomization).
pub fn derive_seed(master: u64, id: &StreamId) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ master.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &part in &id.0 {
        h ^= part as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        h ^= h >> 29;
    }
    // splitmix64 finalizer
    h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// The random stream for `id` under `master`.
pub fn stream(master: u64, id: &StreamId) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, id))
}
