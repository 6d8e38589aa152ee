use local_lll::decomp::NetworkDecomposition;
use local_lll::instances::{generate_instance, InstanceSpec};
use local_lll::model::{Distribution, EventSpec, Predicate, VariableSpec};
use local_lll::solvers::{
    base_lll, base_lll_with, bootstrap_lll, det_lll, BaseConfig, BootstrapConfig, DetConfig,
};
use local_lll::{LLLInstance, PartialAssignment, RoundLedger, SeedContext};

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

fn nd(blocks: Vec<Vec<usize>>) -> NetworkDecomposition {
    NetworkDecomposition {
        blocks,
        claimed_c: 0,
        claimed_d: 0,
        cleanup_used: false,
    }
}

#[test]
fn det_single_conjunction_takes_first_assignment() {
    let inst = LLLInstance::new(bits(2), vec![conj(0, vec![0, 1])]).unwrap();
    let mut ledger = RoundLedger::new();
    let out = det_lll(&inst, &PartialAssignment::new(2), &nd(vec![vec![0]]), 0.25, &mut ledger, &DetConfig::default()).unwrap();
    assert_eq!(out.assignment.complete_values().unwrap(), vec![0, 0]);
}

#[test]
fn det_chain_over_two_blocks() {
    let inst = LLLInstance::new(bits(3), vec![conj(0, vec![0, 1]), conj(1, vec![1, 2])]).unwrap();
    let mut ledger = RoundLedger::new();
    let out = det_lll(
        &inst,
        &PartialAssignment::new(3),
        &nd(vec![vec![0], vec![1]]),
        0.25,
        &mut ledger,
        &DetConfig::default(),
    )
    .unwrap();
    assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
    assert_eq!(out.stats.blocks_processed, 2);
    assert_eq!(out.stats.block_max_cond.len(), 3);
}

#[test]
fn det_on_complete_input_is_identity() {
    let inst = LLLInstance::new(bits(2), vec![conj(0, vec![0, 1])]).unwrap();
    let pa = PartialAssignment::from_values(vec![1, 0]);
    let mut ledger = RoundLedger::new();
    let out = det_lll(&inst, &pa, &NetworkDecomposition::empty(), 0.25, &mut ledger, &DetConfig::default()).unwrap();
    assert_eq!(out.assignment, pa);
    assert_eq!(ledger.total(), 0);
}

#[test]
fn base_on_false_events_is_a_plain_sample() {
    let ev = EventSpec {
        id: 0,
        scope: vec![0, 1],
        predicate: Predicate::Table { accepted: vec![] },
    };
    let inst = LLLInstance::new(bits(3), vec![ev]).unwrap();
    let out = base_lll(&inst, 8, &SeedContext::new(4), &mut RoundLedger::new()).unwrap();
    assert!(out.assignment.is_complete());
    assert_eq!(out.stats.frozen_count, 0);
    assert_eq!(out.stats.unresolved_events, 0);
}

#[test]
fn base_on_fifty_event_chain() {
    let spec = InstanceSpec::conjunction_chain();
    for seed in 0..100 {
        let ctx = SeedContext::new(seed);
        let inst = generate_instance(&spec, 50, &ctx).unwrap();
        let out = base_lll(&inst, 8, &ctx, &mut RoundLedger::new()).unwrap();
        assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
    }
}

#[test]
fn base_handles_moderate_p() {
    let spec = InstanceSpec::EdgeConjunction { degree: 3, domain: 2 };
    for seed in 0..20 {
        let ctx = SeedContext::new(seed);
        let inst = generate_instance(&spec, 200, &ctx).unwrap();
        let out = base_lll(&inst, 8, &ctx, &mut RoundLedger::new()).unwrap();
        assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
        assert!(out.stats.unresolved_events > 0 || seed > 0);
    }
}

#[test]
fn bootstrap_with_true_n_matches_base() {
    let spec = InstanceSpec::EdgeConjunction { degree: 3, domain: 2 };
    let ctx = SeedContext::new(11);
    let inst = generate_instance(&spec, 100, &ctx).unwrap();
    let base = base_lll_with(&inst, 8, &ctx, &mut RoundLedger::new(), &BaseConfig::default()).unwrap();
    let boot = bootstrap_lll(&inst, inst.num_events(), 8, &ctx, &mut RoundLedger::new(), &BootstrapConfig::default()).unwrap();
    assert_eq!(base.assignment, boot.assignment);
    let bs = boot.stats.bootstrap.unwrap();
    assert!(bs.failed_events.is_empty());
    assert!(bs.derived_components.is_empty());
}

#[test]
fn bootstrap_with_small_n_star() {
    let spec = InstanceSpec::EdgeConjunction { degree: 3, domain: 2 };
    for seed in 0..50 {
        let ctx = SeedContext::new(seed);
        let inst = generate_instance(&spec, 1000, &ctx).unwrap();
        let out = bootstrap_lll(&inst, 10, 8, &ctx, &mut RoundLedger::new(), &BootstrapConfig::default()).unwrap();
        assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
        let bs = out.stats.bootstrap.unwrap();
        assert!(bs.d_prime_within_bound);
    }
}
