//! Seeded randomness and LOCAL-model round accounting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Stream = ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub label: String,
    pub rounds: u64,
}

/// Append-only log of simulated rounds. Gathering a radius-`r` ball costs
/// `r` rounds; local computation is free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLedger {
    phases: Vec<Phase>,
    total: u64,
}

impl RoundLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, label: impl Into<String>, rounds: u64) {
        self.phases.push(Phase {
            label: label.into(),
            rounds,
        });
        self.total += rounds;
    }

    pub fn charged(mut self, label: impl Into<String>, rounds: u64) -> Self {
        self.charge(label, rounds);
        self
    }

    /// Appends all phases of `other`, labels prefixed by `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: &RoundLedger) {
        for p in &other.phases {
            self.charge(format!("{prefix}/{}", p.label), p.rounds);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn combine(a: u64, b: u64) -> u64 {
    mix(a ^ mix(b).rotate_left(17))
}

/// Root of all randomness in a run. Contexts form a tree via `child`, and
/// every `(node, phase)` pair of a context yields its own stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedContext {
    master_seed: u64,
    key: u64,
}

impl SeedContext {
    pub fn new(master_seed: u64) -> Self {
        SeedContext {
            master_seed,
            key: mix(master_seed),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn child(&self, tag: u64) -> SeedContext {
        SeedContext {
            master_seed: self.master_seed,
            key: combine(self.key, tag ^ 0xC0FF_EE00_D15E_A5E5),
        }
    }

    /// Child keyed by a label, for readability at call sites.
    pub fn named(&self, label: &str) -> SeedContext {
        let h = label
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        self.child(h)
    }

    pub fn node_stream(&self, node: u64, phase: u64) -> Stream {
        let s = combine(combine(self.key, node), phase.wrapping_add(0x5151));
        ChaCha8Rng::seed_from_u64(s)
    }

    /// A single stream for sequential phases that are not per node.
    pub fn stream(&self) -> Stream {
        self.node_stream(u64::MAX, u64::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;
    use std::collections::HashSet;

    #[test]
    fn ledger_charges() {
        let l = RoundLedger::new().charged("gather", 0);
        assert_eq!((l.total(), l.phases().len()), (0, 1));
        assert_eq!(RoundLedger::new().charged("gather", 5).total(), 5);
        let l = RoundLedger::new().charged("a", 3).charged("b", 4);
        assert_eq!(l.total(), 7);
        let mut outer = RoundLedger::new();
        outer.absorb("inner", &l);
        assert_eq!(outer.total(), 7);
        assert_eq!(outer.phases()[1].label, "inner/b");
    }

    #[test]
    fn streams_are_deterministic() {
        let ctx = SeedContext::new(42);
        let mut a = ctx.node_stream(7, 3);
        let mut b = ctx.node_stream(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_do_not_collide() {
        let ctx = SeedContext::new(1);
        let mut firsts = HashSet::new();
        for node in 0..10_000u64 {
            assert!(firsts.insert(ctx.node_stream(node, 0).next_u64()));
        }
        for phase in 1..10_000u64 {
            assert!(firsts.insert(ctx.node_stream(0, phase).next_u64()));
        }
        assert_ne!(
            ctx.child(1).node_stream(0, 0).next_u64(),
            ctx.child(2).node_stream(0, 0).next_u64()
        );
    }
}
