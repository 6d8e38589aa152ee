use serde::{Deserialize, Serialize};

use super::tape::{SeededTape, Tape};
use super::{SolverOutcome, SolverStats, BLOCK_TOL};
use crate::decomp::NetworkDecomposition;
use crate::error::{Error, Result};
use crate::graph::{component_lists, induced_diameter, power_graph, Bfs, NodeSubset};
use crate::model::{Distribution, LLLInstance, PartialAssignment};
use crate::runtime::{RoundLedger, SeedContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetConfig {
    /// Assignments tried per component before giving up on exhaustive
    /// search.
    pub node_cap: u64,
    /// On failure, retry by local resampling without the block bound, then
    /// by exhaustive search without it.
    pub fallbacks: bool,
    /// Resampling steps of the local fallback.
    pub retry_cap: u64,
    /// Seed for the resampling fallback when `det_lll` is called directly.
    pub fallback_seed: u64,
}

impl Default for DetConfig {
    fn default() -> Self {
        DetConfig {
            node_cap: 10_000_000,
            fallbacks: false,
            retry_cap: 10_000,
            fallback_seed: 0,
        }
    }
}

impl DetConfig {
    pub fn robust() -> Self {
        DetConfig {
            node_cap: 200_000,
            fallbacks: true,
            ..Self::default()
        }
    }
}

/// Per-block bound `p_eff·(e·max(d,1))^i`.
pub fn block_bound(p_eff: f64, d: usize, i: usize) -> f64 {
    p_eff * (std::f64::consts::E * d.max(1) as f64).powi(i as i32)
}

fn next_support(dist: &Distribution, after: Option<u64>) -> Option<u64> {
    match dist {
        Distribution::Uniform { domain } => match after {
            None => Some(0),
            Some(x) if x + 1 < *domain => Some(x + 1),
            Some(_) => None,
        },
        Distribution::Weights(w) => {
            let start = after.map_or(0, |x| x as usize + 1);
            (start..w.len()).find(|&i| w[i] > 0.0).map(|i| i as u64)
        }
    }
}

/// Where the constraints of one component bite during search.
struct Plan {
    vars: Vec<usize>,
    /// Events to forward-check for certain violation after setting var `j`.
    touch: Vec<Vec<usize>>,
    /// Events whose last component variable is `j`.
    finish: Vec<Vec<usize>>,
    affected: Vec<usize>,
}

fn plan(inst: &LLLInstance, pa: &PartialAssignment, comp: &[usize]) -> Plan {
    let mut vars: Vec<usize> = comp
        .iter()
        .flat_map(|&e| inst.event(e).scope.iter().copied())
        .filter(|&v| pa.get(v).is_none())
        .collect();
    vars.sort_unstable();
    vars.dedup();
    let mut affected: Vec<usize> = vars.iter().flat_map(|&v| inst.events_of(v).iter().copied()).collect();
    affected.sort_unstable();
    affected.dedup();
    let pos = |v: usize| vars.binary_search(&v).ok();
    let mut touch = vec![Vec::new(); vars.len()];
    let mut finish = vec![Vec::new(); vars.len()];
    for &f in &affected {
        let mut last = 0;
        for &v in &inst.event(f).scope {
            if let Some(j) = pos(v) {
                touch[j].push(f);
                last = last.max(j);
            }
        }
        finish[last].push(f);
    }
    Plan {
        vars,
        touch,
        finish,
        affected,
    }
}

fn accepts(
    inst: &LLLInstance,
    pa: &PartialAssignment,
    plan: &Plan,
    j: usize,
    tau: Option<f64>,
) -> Result<bool> {
    for &f in &plan.touch[j] {
        if !inst.can_be_false(f, pa)? {
            return Ok(false);
        }
    }
    if let Some(t) = tau {
        for &f in &plan.finish[j] {
            if inst.cond_prob(f, pa)? > t + BLOCK_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lexicographic backtracking; on success the component's variables are
/// set in `pa`. `Ok(false)` means exhausted.
fn backtrack(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    plan: &Plan,
    tau: Option<f64>,
    cap: u64,
) -> Result<bool> {
    let k = plan.vars.len();
    if k == 0 {
        return Ok(true);
    }
    let mut cur: Vec<Option<u64>> = vec![None; k];
    let mut j = 0usize;
    let mut nodes = 0u64;
    loop {
        let v = plan.vars[j];
        match next_support(&inst.variable(v).dist, cur[j]) {
            None => {
                cur[j] = None;
                pa.unset(v);
                if j == 0 {
                    return Ok(false);
                }
                j -= 1;
            }
            Some(x) => {
                nodes += 1;
                if nodes > cap {
                    for &u in &plan.vars {
                        pa.unset(u);
                    }
                    return Err(Error::Capacity {
                        what: "deterministic search nodes",
                        cap,
                    });
                }
                cur[j] = Some(x);
                pa.assign(v, x);
                if accepts(inst, pa, plan, j, tau)? {
                    if j + 1 == k {
                        return Ok(true);
                    }
                    j += 1;
                }
            }
        }
    }
}

/// Draws the component's variables, then resamples the component
/// variables of any affected event that has become certain, until none is.
fn local_resample(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    plan: &Plan,
    tape: &mut dyn Tape,
    cap: u64,
) -> Result<bool> {
    for &v in &plan.vars {
        pa.assign(v, tape.draw(v, &inst.variable(v).dist));
    }
    let mut steps = 0u64;
    loop {
        let mut certain = None;
        for &f in &plan.affected {
            if !inst.can_be_false(f, pa)? {
                certain = Some(f);
                break;
            }
        }
        let Some(f) = certain else {
            return Ok(true);
        };
        if steps == cap {
            break;
        }
        steps += 1;
        for &v in &inst.event(f).scope {
            if plan.vars.binary_search(&v).is_ok() {
                pa.assign(v, tape.draw(v, &inst.variable(v).dist));
            }
        }
    }
    for &v in &plan.vars {
        pa.unset(v);
    }
    Ok(false)
}

/// Draws every unset variable of the component's events from the tape.
pub(crate) fn sample_component(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    comp: &[usize],
    tape: &mut dyn Tape,
) {
    for &e in comp {
        for &v in &inst.event(e).scope {
            if pa.get(v).is_none() {
                pa.assign(v, tape.draw(v, &inst.variable(v).dist));
            }
        }
    }
}

/// Result of solving one component.
pub(crate) enum ComponentResult {
    Exact,
    Fallback,
}

/// Sets the unset variables of one component so that every affected event
/// is not certain and ends at conditional probability `<= tau`.
pub(crate) fn solve_component(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    comp: &[usize],
    tau: f64,
    block: usize,
    cfg: &DetConfig,
    tape: &mut dyn Tape,
) -> Result<ComponentResult> {
    let plan = plan(inst, pa, comp);
    let first = backtrack(inst, pa, &plan, Some(tau), cfg.node_cap);
    match first {
        Ok(true) => return Ok(ComponentResult::Exact),
        Ok(false) | Err(Error::Capacity { .. }) if cfg.fallbacks => {}
        Ok(false) => {
            return Err(Error::InfeasibleComponent {
                block,
                component: comp.to_vec(),
            })
        }
        Err(e) => return Err(e),
    }
    if local_resample(inst, pa, &plan, tape, cfg.retry_cap)? {
        return Ok(ComponentResult::Fallback);
    }
    match backtrack(inst, pa, &plan, None, cfg.node_cap) {
        Ok(true) => return Ok(ComponentResult::Fallback),
        Ok(false) | Err(Error::Capacity { .. }) => {}
        Err(e) => return Err(e),
    }
    Err(Error::InfeasibleComponent {
        block,
        component: comp.to_vec(),
    })
}

/// Block-by-block deterministic completion. `blocks[i]` lists the
/// components of block `i` (event ids); `diameters[i]` is the largest
/// component diameter of block `i` in the decomposition graph.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_blocks(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    blocks: &[Vec<Vec<usize>>],
    diameters: &[usize],
    p_eff: f64,
    cfg: &DetConfig,
    tolerate: bool,
    tape: &mut dyn Tape,
    ledger: &mut RoundLedger,
    stats: &mut SolverStats,
) -> Result<()> {
    let d = inst.d();
    let mut watch: Vec<usize> = blocks
        .iter()
        .flatten()
        .flatten()
        .flat_map(|&e| inst.event(e).scope.iter().copied())
        .filter(|&v| pa.get(v).is_none())
        .flat_map(|v| inst.events_of(v).iter().copied())
        .collect();
    watch.sort_unstable();
    watch.dedup();
    let max_cond = |pa: &PartialAssignment| -> Result<f64> {
        let mut m: f64 = 0.0;
        for &e in &watch {
            m = m.max(inst.cond_prob(e, pa)?);
        }
        Ok(m)
    };
    stats.block_max_cond.push(max_cond(pa)?);
    for (i, comps) in blocks.iter().enumerate() {
        let tau = block_bound(p_eff, d, i + 1);
        let mut relaxed = false;
        for comp in comps {
            match solve_component(inst, pa, comp, tau, i, cfg, tape) {
                Ok(ComponentResult::Exact) => {}
                Ok(ComponentResult::Fallback) => {
                    stats.fallbacks += 1;
                    relaxed = true;
                }
                Err(Error::InfeasibleComponent { .. } | Error::Capacity { .. }) if tolerate => {
                    sample_component(inst, pa, comp, tape);
                    stats.sampled_components += 1;
                    relaxed = true;
                }
                Err(e) => return Err(e),
            }
        }
        let m = max_cond(pa)?;
        stats.block_max_cond.push(m);
        if m > tau + BLOCK_TOL && !relaxed {
            return Err(Error::Invariant(format!(
                "after block {i} an event has conditional probability {m} above {tau}"
            )));
        }
        stats.blocks_processed += 1;
        ledger.charge(format!("det/block{i}"), 2 * diameters[i] as u64 + 2);
    }
    Ok(())
}

/// Completes `pa` deterministically over the network decomposition `nd` of
/// the squared dependency graph restricted to unresolved events.
pub fn det_lll(
    inst: &LLLInstance,
    pa: &PartialAssignment,
    nd: &NetworkDecomposition,
    p_eff: f64,
    ledger: &mut RoundLedger,
    cfg: &DetConfig,
) -> Result<SolverOutcome> {
    let c = nd.blocks.len();
    if pa.is_complete() {
        let bad = inst.violated_events(pa)?;
        if !bad.is_empty() {
            return Err(Error::Invariant(format!("complete input violates events {bad:?}")));
        }
        return Ok(SolverOutcome {
            assignment: pa.clone(),
            ledger: RoundLedger::new(),
            stats: SolverStats::default(),
        });
    }
    if block_bound(p_eff, inst.d(), c) >= 1.0 {
        log::warn!("p_eff·(e·d)^C >= 1 for C = {c}; search may fail");
    }
    let ne = inst.num_events();
    let covered = NodeSubset::from_nodes(ne, nd.blocks.iter().flatten().copied());
    for e in 0..ne {
        if !covered.contains(e) && inst.event(e).scope.iter().any(|&v| pa.get(v).is_none()) {
            return Err(Error::param(format!("event {e} has unset variables but no block")));
        }
    }
    let sq = power_graph(inst.dependency_graph(), 2);
    let mut bfs = Bfs::new(ne);
    let mut blocks = Vec::with_capacity(c);
    let mut diameters = Vec::with_capacity(c);
    for b in &nd.blocks {
        let comps = component_lists(&sq, &NodeSubset::from_nodes(ne, b.iter().copied()));
        diameters.push(
            comps
                .iter()
                .map(|k| induced_diameter(&sq, k, &mut bfs).unwrap_or(0))
                .max()
                .unwrap_or(0),
        );
        blocks.push(comps);
    }
    let mut out = pa.clone();
    let mut stats = SolverStats::default();
    let mut local = RoundLedger::new();
    let mut tape = SeededTape::new(SeedContext::new(cfg.fallback_seed).named("det"), inst.num_vars());
    run_blocks(inst, &mut out, &blocks, &diameters, p_eff, cfg, false, &mut tape, &mut local, &mut stats)?;
    // variables outside every event take their smallest value
    for v in 0..inst.num_vars() {
        if out.get(v).is_none() && inst.events_of(v).is_empty() {
            let x = inst.variable(v).dist.support().next().unwrap_or(0);
            out.assign(v, x);
        }
    }
    ledger.absorb("det", &local);
    if !out.is_complete() {
        let v = out.unset_vars().next().unwrap();
        return Err(Error::IncompleteAssignment(v));
    }
    let bad = inst.violated_events(&out)?;
    if !bad.is_empty() {
        return Err(Error::Invariant(format!("det_lll left violated events {bad:?}")));
    }
    stats.frozen_count = pa.frozen_count();
    Ok(SolverOutcome {
        assignment: out,
        ledger: local,
        stats,
    })
}
