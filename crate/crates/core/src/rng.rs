//! Seeded random streams.
//!
//! Every (simulation, stream) pair owns an independent ChaCha8 stream. The
//! key is expanded from the global seed with `SeedableRng::seed_from_u64`
//! (PCG32 expansion, fixed by `rand_core`), and the 64-bit ChaCha stream id
//! is `2 * sim_index + tag` with tag 0 for the bandit and 1 for the policy.
//! The agent never enters the derivation: all agents of simulation `s` see
//! the same environment draws and the same tie-breaking stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator used for every simulation stream.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamKind {
    Bandit,
    Policy,
}

impl StreamKind {
    fn tag(self) -> u64 {
        match self {
            StreamKind::Bandit => 0,
            StreamKind::Policy => 1,
        }
    }
}

/// Fully determines one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamSeed {
    pub key: u64,
    pub stream: u64,
}

impl StreamSeed {
    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(self.stream);
        rng
    }
}

/// Seed of the `kind` stream of simulation `sim_index` (1-based).
pub fn derive_seed(global_seed: u64, sim_index: usize, kind: StreamKind) -> StreamSeed {
    debug_assert!(sim_index >= 1, "simulation indices start at 1");
    StreamSeed {
        key: global_seed,
        stream: ((sim_index as u64) << 1) | kind.tag(),
    }
}

/// Wraps a generator and records every word it hands out.
#[derive(Debug, Clone)]
pub struct RecordingRng<R> {
    inner: R,
    draws: Vec<u64>,
}

impl<R: RngCore> RecordingRng<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            draws: Vec::new(),
        }
    }

    pub fn draws(&self) -> &[u64] {
        &self.draws
    }

    pub fn into_draws(self) -> Vec<u64> {
        self.draws
    }
}

impl<R: RngCore> RngCore for RecordingRng<R> {
    fn next_u32(&mut self) -> u32 {
        let v = self.inner.next_u32();
        self.draws.push(u64::from(v));
        v
    }

    fn next_u64(&mut self) -> u64 {
        let v = self.inner.next_u64();
        self.draws.push(v);
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst);
        self.draws.extend(dst.iter().map(|&b| u64::from(b)));
    }
}
