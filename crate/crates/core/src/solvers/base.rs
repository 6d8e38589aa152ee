use serde::{Deserialize, Serialize};

use super::det::{run_blocks, sample_component, DetConfig};
use super::rps::{partial_setting, sample_free_variables};
use super::tape::{SeededTape, Tape};
use super::{local_square, SolverOutcome, SolverStats};
use crate::decomp::shattered_decomposition_detailed;
use crate::error::{Error, Result};
use crate::graph::{component_lists, induced_diameter, Bfs, NodeSubset};
use crate::model::{Criterion, LLLInstance, PartialAssignment};
use crate::runtime::{RoundLedger, SeedContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseConfig {
    /// Node count the algorithm is told; defaults to the event count.
    pub n_param: Option<usize>,
    pub det: DetConfig,
    /// Residual components larger than this are sampled instead of solved.
    pub component_budget: Option<usize>,
    /// Return assignments with violated events instead of failing.
    pub tolerate_failure: bool,
    /// Run the randomized partial setting first; without it the
    /// decomposition covers every event and completion uses `p_eff = p`.
    pub partial_setting: bool,
}

impl Default for BaseConfig {
    fn default() -> Self {
        BaseConfig {
            n_param: None,
            det: DetConfig::robust(),
            component_budget: None,
            tolerate_failure: false,
            partial_setting: true,
        }
    }
}

/// Partial setting over `active`, then deterministic completion of what is
/// left over a shattered decomposition. Returns the violated active events.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_region(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    active: &[usize],
    lambda: usize,
    tape: &mut dyn Tape,
    cfg: &BaseConfig,
    ledger: &mut RoundLedger,
    stats: &mut SolverStats,
) -> Result<Vec<usize>> {
    let n_param = cfg.n_param.unwrap_or(inst.num_events()).max(2);
    let (unresolved, p_eff) = if cfg.partial_setting {
        let rps = partial_setting(inst, pa, active, tape, n_param, ledger)?;
        stats.frozen_count += rps.frozen;
        stats.rps_max_cond = Some(stats.rps_max_cond.unwrap_or(0.0).max(rps.max_cond));
        (rps.unresolved, inst.p().sqrt())
    } else {
        let open: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&e| inst.event(e).scope.iter().any(|&v| pa.get(v).is_none()))
            .collect();
        (open, inst.p())
    };
    stats.unresolved_events += unresolved.len();

    let (sq, map) = local_square(inst, &unresolved);
    let comps = component_lists(&sq, &sq.all_nodes());
    stats
        .residual_component_sizes
        .extend(comps.iter().map(Vec::len));
    let mut keep = NodeSubset::empty(sq.n());
    for c in &comps {
        if cfg.component_budget.is_some_and(|b| c.len() > b) {
            let global: Vec<usize> = c.iter().map(|&i| map[i]).collect();
            sample_component(inst, pa, &global, tape);
            stats.sampled_components += 1;
        } else {
            for &i in c {
                keep.insert(i);
            }
        }
    }
    let shatter = shattered_decomposition_detailed(&sq, &keep, lambda, n_param, ledger)?;
    let mut bfs = Bfs::new(sq.n());
    let mut blocks = Vec::new();
    let mut diameters = Vec::new();
    for b in &shatter.decomposition.blocks {
        let sub = NodeSubset::from_nodes(sq.n(), b.iter().copied());
        let local_comps = component_lists(&sq, &sub);
        diameters.push(
            local_comps
                .iter()
                .map(|k| induced_diameter(&sq, k, &mut bfs).unwrap_or(0))
                .max()
                .unwrap_or(0),
        );
        blocks.push(
            local_comps
                .into_iter()
                .map(|k| k.into_iter().map(|i| map[i]).collect())
                .collect::<Vec<Vec<usize>>>(),
        );
    }
    run_blocks(
        inst,
        pa,
        &blocks,
        &diameters,
        p_eff,
        &cfg.det,
        cfg.tolerate_failure,
        tape,
        ledger,
        stats,
    )?;
    let mut failed = Vec::new();
    for &e in active {
        let scope = &inst.event(e).scope;
        if let Some(&v) = scope.iter().find(|&&v| pa.get(v).is_none()) {
            return Err(Error::IncompleteAssignment(v));
        }
        let vals: Vec<u64> = scope.iter().map(|&v| pa.get(v).unwrap()).collect();
        if inst.event(e).predicate.eval(&vals) {
            failed.push(e);
        }
    }
    Ok(failed)
}

/// Randomized partial setting, shattering, then deterministic completion.
pub fn base_lll(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<SolverOutcome> {
    base_lll_with(inst, lambda, ctx, ledger, &BaseConfig::default())
}

pub fn base_lll_with(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
    cfg: &BaseConfig,
) -> Result<SolverOutcome> {
    if lambda == 0 {
        return Err(Error::param("lambda must be positive"));
    }
    if lambda < 8 {
        log::warn!("base algorithm run with lambda = {lambda} < 8");
    }
    if !inst.check(Criterion::Poly(4 * lambda as u32)) {
        log::warn!("instance does not satisfy p(ed)^(4λ) < 1 for λ = {lambda}");
    }
    let (out, _) = run_base(inst, lambda, ctx, cfg)?;
    if !cfg.tolerate_failure {
        let bad = inst.violated_events(&out.assignment)?;
        if !bad.is_empty() {
            return Err(Error::Invariant(format!("base algorithm left violated events {bad:?}")));
        }
    }
    ledger.absorb("base", &out.ledger);
    Ok(out)
}

fn run_base(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    cfg: &BaseConfig,
) -> Result<(SolverOutcome, Vec<usize>)> {
    let mut pa = PartialAssignment::new(inst.num_vars());
    let mut tape = SeededTape::new(ctx.named("base"), inst.num_vars());
    let mut ledger = RoundLedger::new();
    let mut stats = SolverStats {
        sqrt_p: inst.p().sqrt(),
        ..SolverStats::default()
    };
    sample_free_variables(inst, &mut pa, &mut tape)?;
    let all: Vec<usize> = (0..inst.num_events()).collect();
    let failed = solve_region(inst, &mut pa, &all, lambda, &mut tape, cfg, &mut ledger, &mut stats)?;
    Ok((
        SolverOutcome {
            assignment: pa,
            ledger,
            stats,
        },
        failed,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub retry_cap: u64,
    pub det: DetConfig,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            retry_cap: 10_000,
            det: DetConfig::robust(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BootstrapStats {
    pub n_star: usize,
    pub component_budget: Option<usize>,
    /// Rounds of the inner run.
    pub t_inner: u64,
    pub failed_events: Vec<usize>,
    /// Failed events grouped by dependency distance `<= 2T+1`.
    pub derived_components: Vec<Vec<usize>>,
    /// Largest number of events within distance `2T+1` of a failed event.
    pub d_prime: usize,
    /// `(2T+1)·log₂ max(d,1)`, i.e. `log₂ d^{2T+1}`.
    pub d_bound_log2: f64,
    pub d_prime_within_bound: bool,
    /// Fraction of events failed by the inner run.
    pub p_prime: f64,
    /// Inner-run attempts spent per derived component.
    pub retries: Vec<u64>,
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

/// Runs the base algorithm as if there were only `n_star` events, then
/// repairs the events it failed on: failed events within distance `2T+1`
/// form one derived component, whose distance-`T` neighbourhood is cleared
/// and re-run on fresh tapes until every event touching it is avoided.
pub fn bootstrap_lll(
    inst: &LLLInstance,
    n_star: usize,
    lambda_inner: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
    cfg: &BootstrapConfig,
) -> Result<SolverOutcome> {
    if n_star < 2 {
        return Err(Error::param(format!("n_star must be at least 2, got {n_star}")));
    }
    let n = inst.num_events();
    let budget = (n_star < n).then(|| 4 * ceil_log2(n_star));
    let inner_cfg = BaseConfig {
        n_param: Some(n_star),
        det: cfg.det.clone(),
        component_budget: budget,
        tolerate_failure: true,
        partial_setting: true,
    };
    let (inner, failed) = run_base(inst, lambda_inner, ctx, &inner_cfg)?;
    let t = inner.ledger.total() as usize;
    let mut stats = inner.stats.clone();
    let mut total = inner.ledger.clone();
    let mut pa = inner.assignment;
    // the derived instance is solved honestly: true n, no budget
    let repair_cfg = BaseConfig {
        n_param: None,
        component_budget: None,
        ..inner_cfg.clone()
    };
    let dep = inst.dependency_graph();
    let d = inst.d();
    let radius = 2 * t + 1;
    let mut bs = BootstrapStats {
        n_star,
        component_budget: budget,
        t_inner: t as u64,
        failed_events: failed.clone(),
        d_bound_log2: radius as f64 * (d.max(1) as f64).log2(),
        d_prime_within_bound: true,
        p_prime: failed.len() as f64 / n.max(1) as f64,
        ..BootstrapStats::default()
    };

    if !failed.is_empty() {
        // derived dependency structure among failed events
        let mut bfs = Bfs::new(dep.n());
        let mut parent: Vec<usize> = (0..failed.len()).collect();
        for (i, &e) in failed.iter().enumerate() {
            let ball = bfs.run(dep, e, radius, |_| true);
            bs.d_prime = bs.d_prime.max(ball.len() - 1);
            for &f in ball {
                if let Ok(j) = failed.binary_search(&f) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let bound = (d as f64).powi(radius.min(i32::MAX as usize) as i32);
        bs.d_prime_within_bound = bs.d_prime as f64 <= bound;
        let groups = collect_groups(&failed, &mut parent);
        total.charge("bootstrap/derived-gather", radius as u64);

        let (retries, repair_rounds) =
            repair_groups(inst, &mut pa, &groups, t, lambda_inner, &ctx.named("repair"), &repair_cfg, cfg.retry_cap)?;
        bs.retries = retries;
        total.charge("bootstrap/repair", repair_rounds);
        bs.derived_components = groups;
    }
    let bad = inst.violated_events(&pa)?;
    if !bad.is_empty() {
        return Err(Error::Invariant(format!("bootstrap left violated events {bad:?}")));
    }
    stats.bootstrap = Some(bs);
    ledger.absorb("bootstrap", &total);
    Ok(SolverOutcome {
        assignment: pa,
        ledger: total,
        stats,
    })
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let nx = p[y];
        p[y] = r;
        y = nx;
    }
    r
}

fn collect_groups(items: &[usize], parent: &mut [usize]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); items.len()];
    for i in 0..items.len() {
        let r = find(parent, i);
        groups[r].push(items[i]);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Clears the variables of all events within `radius` of each group and
/// re-solves the events touching them on fresh tapes until none is
/// violated. Returns attempts per group and the largest round count.
#[allow(clippy::too_many_arguments)]
fn repair_groups(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    groups: &[Vec<usize>],
    radius: usize,
    lambda: usize,
    ctx: &SeedContext,
    cfg: &BaseConfig,
    retry_cap: u64,
) -> Result<(Vec<u64>, u64)> {
    let dep = inst.dependency_graph();
    let mut bfs = Bfs::new(dep.n());
    let mut retries = Vec::with_capacity(groups.len());
    let mut repair_rounds = 0u64;
    for (k, comp) in groups.iter().enumerate() {
        let mut cleared: Vec<usize> = bfs
            .run_multi(dep, comp, radius, |_| true)
            .iter()
            .flat_map(|&e| inst.event(e).scope.iter().copied())
            .collect();
        cleared.sort_unstable();
        cleared.dedup();
        let mut active: Vec<usize> = cleared
            .iter()
            .flat_map(|&v| inst.events_of(v).iter().copied())
            .collect();
        active.sort_unstable();
        active.dedup();
        let mut rounds = 0u64;
        let mut tries = 0u64;
        loop {
            if tries == retry_cap {
                return Err(Error::Nonconvergence {
                    what: "component repair",
                    cap: retry_cap,
                });
            }
            tries += 1;
            for &v in &cleared {
                pa.release(v);
            }
            let mut tape = SeededTape::new(ctx.child(k as u64).child(tries), inst.num_vars());
            let mut l = RoundLedger::new();
            let mut s = SolverStats::default();
            let bad = solve_region(inst, pa, &active, lambda, &mut tape, cfg, &mut l, &mut s)?;
            rounds += l.total();
            if bad.is_empty() {
                break;
            }
        }
        retries.push(tries);
        repair_rounds = repair_rounds.max(rounds);
    }
    Ok((retries, repair_rounds))
}

/// Shattered decomposition of the squared dependency graph over all
/// events, deterministic completion with `p_eff = p`, then fresh-tape
/// retries around any component left violated.
pub fn solve_shattered(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<SolverOutcome> {
    shattered_impl(inst, lambda, ctx, ledger)
}

/// Full random sample, then fresh-tape retries around every violated
/// event. Suited to instances with small `p`, where few events fail.
pub fn sample_and_repair(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<SolverOutcome> {
    let cfg = BaseConfig {
        tolerate_failure: true,
        partial_setting: false,
        ..BaseConfig::default()
    };
    let mut pa = PartialAssignment::new(inst.num_vars());
    let mut tape = SeededTape::new(ctx.named("sample"), inst.num_vars());
    let mut local = RoundLedger::new();
    for v in 0..inst.num_vars() {
        pa.set(v, tape.draw(v, &inst.variable(v).dist))?;
    }
    local.charge("sample", 1);
    let failed = inst.violated_events(&pa)?;
    repair_failed(inst, &mut pa, &failed, lambda, ctx, &cfg, &mut local)?;
    ledger.absorb("lll", &local);
    Ok(SolverOutcome {
        assignment: pa,
        ledger: local,
        stats: SolverStats {
            sqrt_p: inst.p().sqrt(),
            unresolved_events: failed.len(),
            ..SolverStats::default()
        },
    })
}

/// Groups failed events at dependency distance at most 2 and retries each
/// group with fresh tapes.
fn repair_failed(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    failed: &[usize],
    lambda: usize,
    ctx: &SeedContext,
    cfg: &BaseConfig,
    ledger: &mut RoundLedger,
) -> Result<()> {
    if !failed.is_empty() {
        let dep = inst.dependency_graph();
        let mut bfs = Bfs::new(dep.n());
        let mut parent: Vec<usize> = (0..failed.len()).collect();
        for (i, &e) in failed.iter().enumerate() {
            for &f in bfs.run(dep, e, 2, |_| true) {
                if let Ok(j) = failed.binary_search(&f) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let groups = collect_groups(failed, &mut parent);
        let (_, rounds) = repair_groups(inst, pa, &groups, 1, lambda, &ctx.named("retry"), cfg, 10_000)?;
        ledger.charge("retry", rounds);
    }
    let bad = inst.violated_events(pa)?;
    if !bad.is_empty() {
        return Err(Error::Invariant(format!("completion left violated events {bad:?}")));
    }
    Ok(())
}

fn shattered_impl(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<SolverOutcome> {
    let cfg = BaseConfig {
        tolerate_failure: true,
        partial_setting: false,
        ..BaseConfig::default()
    };
    let mut pa = PartialAssignment::new(inst.num_vars());
    let mut tape = SeededTape::new(ctx.named("shattered"), inst.num_vars());
    let mut local = RoundLedger::new();
    let mut stats = SolverStats {
        sqrt_p: inst.p().sqrt(),
        ..SolverStats::default()
    };
    sample_free_variables(inst, &mut pa, &mut tape)?;
    let all: Vec<usize> = (0..inst.num_events()).collect();
    let failed = solve_region(inst, &mut pa, &all, lambda, &mut tape, &cfg, &mut local, &mut stats)?;
    repair_failed(inst, &mut pa, &failed, lambda, ctx, &cfg, &mut local)?;
    ledger.absorb("lll", &local);
    Ok(SolverOutcome {
        assignment: pa,
        ledger: local,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(10), 4);
        assert_eq!(ceil_log2(16), 4);
    }
}
