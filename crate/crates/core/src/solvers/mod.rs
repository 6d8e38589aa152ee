//! LLL solvers: Moser–Tardos resampling, the randomized partial setting,
//! deterministic completion over a network decomposition, their
//! composition, and the bootstrapped variant.

mod base;
mod det;
mod rps;
mod tape;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph};
use crate::model::{Criterion, LLLInstance, PartialAssignment};
use crate::runtime::{RoundLedger, SeedContext};

pub use base::{
    base_lll, base_lll_with, bootstrap_lll, solve_shattered, sample_and_repair, BaseConfig, BootstrapConfig, BootstrapStats,
};
pub use det::{block_bound, det_lll, DetConfig};
pub use rps::{partial_setting, random_partial_setting, RpsStats};
pub use tape::{ConstTape, SeededTape, Tape};

/// Relative slack on the `>= √p` freezing comparison.
pub(crate) const DANGER_TOL: f64 = 1e-9;
/// Slack on the exit check of the partial setting.
pub(crate) const POSTCHECK_TOL: f64 = 1e-10;
/// Slack on per-block bounds.
pub(crate) const BLOCK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub resamplings: u64,
    pub frozen_count: usize,
    pub unresolved_events: usize,
    /// Component sizes of the squared dependency graph on unresolved events.
    pub residual_component_sizes: Vec<usize>,
    pub blocks_processed: usize,
    pub rps_max_cond: Option<f64>,
    pub sqrt_p: f64,
    /// Largest conditional probability on entry and after each block.
    pub block_max_cond: Vec<f64>,
    /// Components solved without the block bound.
    pub fallbacks: usize,
    /// Components sampled at random (over budget or unsolvable).
    pub sampled_components: usize,
    pub bootstrap: Option<BootstrapStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub assignment: PartialAssignment,
    pub ledger: RoundLedger,
    pub stats: SolverStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtConfig {
    pub max_resamplings: u64,
}

impl Default for MtConfig {
    fn default() -> Self {
        MtConfig {
            max_resamplings: 1_000_000,
        }
    }
}

/// Sequential Moser–Tardos: sample everything, then resample the smallest
/// violated event until none is left.
pub fn moser_tardos(inst: &LLLInstance, ctx: &SeedContext, cfg: &MtConfig) -> Result<SolverOutcome> {
    if !inst.check(Criterion::Epd) {
        log::warn!("instance does not satisfy e·p·d <= 1");
    }
    let mut tape = SeededTape::new(ctx.named("mt"), inst.num_vars());
    let mut values: Vec<u64> = (0..inst.num_vars())
        .map(|v| tape.draw(v, &inst.variable(v).dist))
        .collect();
    let mut ledger = RoundLedger::new();
    ledger.charge("mt/sample-and-check", 1);
    let mut violated: BTreeSet<usize> = inst.violated_under(&values).into_iter().collect();
    let mut resamplings = 0u64;
    while let Some(e) = violated.pop_first() {
        if resamplings >= cfg.max_resamplings {
            return Err(Error::Nonconvergence {
                what: "Moser-Tardos resampling",
                cap: cfg.max_resamplings,
            });
        }
        resamplings += 1;
        for &v in &inst.event(e).scope {
            values[v] = tape.draw(v, &inst.variable(v).dist);
        }
        for &v in &inst.event(e).scope {
            for &f in inst.events_of(v) {
                if inst.eval_event(f, &values) {
                    violated.insert(f);
                } else {
                    violated.remove(&f);
                }
            }
        }
    }
    if resamplings > 0 {
        ledger.charge("mt/resample", resamplings);
    }
    let assignment = PartialAssignment::from_values(values);
    debug_assert!(inst.violated_events(&assignment).unwrap().is_empty());
    Ok(SolverOutcome {
        assignment,
        ledger,
        stats: SolverStats {
            resamplings,
            sqrt_p: inst.p().sqrt(),
            ..SolverStats::default()
        },
    })
}

/// Graph on `events` (local indices) joining events at dependency distance
/// at most 2, measured through all events.
pub(crate) fn local_square(inst: &LLLInstance, events: &[usize]) -> (Graph, Vec<usize>) {
    let dep = inst.dependency_graph();
    let mut local = vec![usize::MAX; dep.n()];
    for (i, &e) in events.iter().enumerate() {
        local[e] = i;
    }
    let mut bfs = Bfs::new(dep.n());
    let adj = events
        .iter()
        .map(|&e| {
            let mut l: Vec<usize> = bfs
                .run(dep, e, 2, |_| true)
                .iter()
                .filter(|&&f| f != e && local[f] != usize::MAX)
                .map(|&f| local[f])
                .collect();
            l.sort_unstable();
            l
        })
        .collect();
    (Graph::from_sorted_adjacency(adj), events.to_vec())
}

/// Iterated base-2 logarithm, at least 1.
pub fn log_star(n: usize) -> u64 {
    let mut x = n as f64;
    let mut k = 0;
    while x > 1.0 {
        x = x.log2();
        k += 1;
    }
    k.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Distribution, EventSpec, Predicate, VariableSpec};

    fn bits(n: usize) -> Vec<VariableSpec> {
        (0..n)
            .map(|id| VariableSpec {
                id,
                dist: Distribution::bits(),
            })
            .collect()
    }

    fn conj(id: usize, scope: Vec<usize>) -> EventSpec {
        let k = scope.len();
        EventSpec {
            id,
            scope,
            predicate: Predicate::Conjunction { values: vec![1; k] },
        }
    }

    #[test]
    fn mt_examples() {
        let inst = LLLInstance::new(bits(3), vec![conj(0, vec![0, 1]), conj(1, vec![1, 2])]).unwrap();
        for seed in 0..20 {
            let out = moser_tardos(&inst, &SeedContext::new(seed), &MtConfig::default()).unwrap();
            assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
        }
        let never = EventSpec {
            id: 0,
            scope: vec![0],
            predicate: Predicate::Table { accepted: vec![] },
        };
        let inst = LLLInstance::new(bits(1), vec![never]).unwrap();
        let out = moser_tardos(&inst, &SeedContext::new(1), &MtConfig::default()).unwrap();
        assert_eq!(out.stats.resamplings, 0);
        let one = LLLInstance::new(bits(1), vec![conj(0, vec![0])]).unwrap();
        for seed in 0..20 {
            let out = moser_tardos(&one, &SeedContext::new(seed), &MtConfig::default()).unwrap();
            assert_eq!(out.assignment.get(0), Some(0));
        }
    }

    #[test]
    fn mt_cap() {
        let both = vec![conj(0, vec![0]), EventSpec {
            id: 1,
            scope: vec![0],
            predicate: Predicate::Conjunction { values: vec![0] },
        }];
        let inst = LLLInstance::new(bits(1), both).unwrap();
        let cfg = MtConfig { max_resamplings: 50 };
        assert!(matches!(
            moser_tardos(&inst, &SeedContext::new(0), &cfg),
            Err(Error::Nonconvergence { .. })
        ));
    }

    #[test]
    fn log_star_values() {
        assert_eq!(log_star(1), 1);
        assert_eq!(log_star(2), 1);
        assert_eq!(log_star(16), 3);
        assert_eq!(log_star(65536), 4);
        assert_eq!(log_star(100_000), 5);
    }
}
