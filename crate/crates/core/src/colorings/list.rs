use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{defective_coloring, log2, ColoringResult, StepRecord, INNER_LAMBDA};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{Bound, Distribution, EventSpec, LLLInstance, Predicate, VariableSpec};
use crate::runtime::{RoundLedger, SeedContext};
use crate::solvers::{sample_and_repair, solve_shattered};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListState {
    /// Sorted color list per node.
    pub lists: Vec<Vec<usize>>,
    /// Lower bound on every list size.
    pub l: usize,
    /// Conflict constant: `|N_q(v)| <= l / c`.
    pub c: f64,
    /// `(node, color)` pairs whose fate is still open.
    pub frozen: Vec<(usize, usize)>,
}

impl ListState {
    pub fn new(lists: Vec<Vec<usize>>, c: f64) -> Self {
        let mut lists = lists;
        for l in lists.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        let l = lists.iter().map(Vec::len).min().unwrap_or(0);
        ListState {
            lists,
            l,
            c,
            frozen: Vec::new(),
        }
    }

    /// Largest `|N_q(v)|` over nodes and their colors.
    pub fn max_conflict(&self, g: &Graph) -> usize {
        (0..g.n())
            .flat_map(|v| self.lists[v].iter().map(move |&q| (v, q)))
            .map(|(v, q)| conflict(g, &self.lists, v, q))
            .max()
            .unwrap_or(0)
    }

    pub fn entry_invariant_holds(&self, g: &Graph) -> bool {
        self.lists.iter().all(|l| l.len() >= self.l) && self.max_conflict(g) as f64 <= self.l as f64 / self.c
    }
}

fn conflict(g: &Graph, lists: &[Vec<usize>], v: usize, q: usize) -> usize {
    g.neighbors(v).iter().filter(|&&u| lists[u].binary_search(&q).is_ok()).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListConfig {
    /// Phase constant `K₀`.
    pub k0: f64,
    /// Below `l_min_factor·C` pruning stops and the lists are finished
    /// directly.
    pub l_min_factor: f64,
    /// Lists longer than this are downsampled first; `None` means
    /// `⌈log₂² n⌉`.
    pub l_cap: Option<usize>,
    pub max_rounds: usize,
}

impl Default for ListConfig {
    fn default() -> Self {
        ListConfig {
            k0: 1.0,
            l_min_factor: 4.0,
            l_cap: None,
            max_rounds: 64,
        }
    }
}

/// Targets of one pruning step for list bound `l` and constant `c`.
fn prune_bounds(l: usize, c: f64) -> (impl Fn(usize) -> usize, usize) {
    let lg2 = log2(l as f64).powi(2);
    let size = move |len: usize| ((len as f64 / 2.0) * (1.0 - 1.0 / lg2)).ceil().max(0.0) as usize;
    let conflict = ((1.0 + 1.0 / lg2) * l as f64 / (2.0 * c)).ceil() as usize;
    (size, conflict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneCheck {
    pub size_ok: bool,
    pub conflict_ok: bool,
    pub subset_ok: bool,
    pub min_kept: usize,
    pub max_conflict: usize,
    pub conflict_bound: usize,
}

/// Checks both pruning inequalities of `after` against `before`.
pub fn check_pruning(g: &Graph, before: &ListState, after: &ListState) -> PruneCheck {
    let (size, bound) = prune_bounds(before.l, before.c);
    let subset_ok = (0..g.n()).all(|v| after.lists[v].iter().all(|q| before.lists[v].binary_search(q).is_ok()));
    let size_ok = (0..g.n()).all(|v| after.lists[v].len() >= size(before.lists[v].len()));
    let max_conflict = after.max_conflict(g);
    PruneCheck {
        size_ok,
        conflict_ok: max_conflict <= bound,
        subset_ok,
        min_kept: after.lists.iter().map(Vec::len).min().unwrap_or(0),
        max_conflict,
        conflict_bound: bound,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    Open,
    Kept,
    Dropped,
    Frozen,
}

pub fn prune_once(g: &Graph, state: &ListState, ctx: &SeedContext, ledger: &mut RoundLedger) -> Result<ListState> {
    prune_once_with(g, state, &ListConfig::default(), ctx, ledger)
}

/// Halves every list while keeping per-color conflicts near half: colors
/// are sampled in phases scheduled by a defective coloring of the
/// color-choice graph, suspicious choices are frozen, and the frozen ones
/// are fixed by an LLL whose events are the two output inequalities.
pub fn prune_once_with(
    g: &Graph,
    state: &ListState,
    cfg: &ListConfig,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<ListState> {
    let n = g.n();
    let lf = state.l as f64;
    let lg = log2(lf);
    let lists = &state.lists;
    let mut off = vec![0usize; n + 1];
    for v in 0..n {
        off[v + 1] = off[v] + lists[v].len();
    }
    let nh = off[n];
    let owner: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, lists[v].len())).collect();
    let color_of = |h: usize| lists[owner[h]][h - off[owner[h]]];
    let index_of = |v: usize, q: usize| lists[v].binary_search(&q).ok().map(|i| off[v] + i);

    // color-choice graph
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nh];
    for v in 0..n {
        for h in off[v]..off[v + 1] {
            adj[h].extend((off[v]..off[v + 1]).filter(|&x| x != h));
            let q = color_of(h);
            adj[h].extend(g.neighbors(v).iter().filter_map(|&u| index_of(u, q)));
            adj[h].sort_unstable();
        }
    }
    let hg = Graph::from_sorted_adjacency(adj);
    let f = (lf / (2.0 * lg * lg)).ceil() as usize;
    let mut sched_ledger = RoundLedger::new();
    let chi = defective_coloring(&hg, f, &ctx.named("schedule"), &mut sched_ledger)?;
    ledger.absorb("prune/schedule", &sched_ledger);
    let classes = chi.count;
    let phases = ((cfg.k0 * lg.powi(4)).ceil() as usize).max(classes);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for h in 0..nh {
        by_class[chi.colors[h]].push(h);
    }

    // rounding: trigger thresholds rounded down, slack terms kept exact
    let unit = lf / (16.0 * cfg.k0 * lg.powi(6));
    let node_trigger = unit.floor() as usize;
    let color_trigger = (unit / state.c).floor() as usize;
    let node_slack = unit;
    let color_slack = unit / state.c;

    let mut fate = vec![Fate::Open; nh];
    let draw = ctx.named("prune");
    for members in &by_class {
        let sampled: Vec<usize> = members.iter().copied().filter(|&h| fate[h] == Fate::Open).collect();
        if sampled.is_empty() {
            continue;
        }
        let mut z_node: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut z_color: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &h in &sampled {
            let keep = draw.node_stream(h as u64, 0).gen_bool(0.5);
            fate[h] = if keep { Fate::Kept } else { Fate::Dropped };
            let (u, q) = (owner[h], color_of(h));
            let e = z_node.entry(u).or_default();
            e.0 += 1;
            e.1 += keep as usize;
            for &v in g.neighbors(u) {
                if lists[v].binary_search(&q).is_ok() {
                    let e = z_color.entry((v, q)).or_default();
                    e.0 += 1;
                    e.1 += keep as usize;
                }
            }
        }
        let mut freeze_nodes: Vec<usize> = Vec::new();
        for (&v, &(z, k)) in &z_node {
            if z >= node_trigger && (k as f64) < z as f64 / 2.0 - node_slack {
                freeze_nodes.push(v);
            }
        }
        for (&(v, _), &(z, k)) in &z_color {
            if z >= color_trigger && k as f64 > z as f64 / 2.0 + color_slack {
                freeze_nodes.extend(g.neighbors(v).iter().copied());
            }
        }
        for v in freeze_nodes {
            for fh in fate.iter_mut().take(off[v + 1]).skip(off[v]) {
                if *fh == Fate::Open {
                    *fh = Fate::Frozen;
                }
            }
        }
    }
    ledger.charge("prune/phases", 2 * phases as u64);

    // nodes with few frozen colors drop them
    let few = lf / (2.0 * lg * lg);
    for v in 0..n {
        let fv = (off[v]..off[v + 1]).filter(|&h| fate[h] == Fate::Frozen).count();
        if (fv as f64) < few {
            for fh in fate.iter_mut().take(off[v + 1]).skip(off[v]) {
                if *fh == Fate::Frozen {
                    *fh = Fate::Dropped;
                }
            }
        }
    }
    let frozen: Vec<usize> = (0..nh).filter(|&h| fate[h] == Fate::Frozen).collect();
    let frozen_pairs: Vec<(usize, usize)> = frozen.iter().map(|&h| (owner[h], color_of(h))).collect();

    // completion LLL over frozen choices; events are the output bounds
    let (size, bound) = prune_bounds(state.l, state.c);
    if !frozen.is_empty() || (0..n).any(|v| (off[v]..off[v + 1]).filter(|&h| fate[h] == Fate::Kept).count() < size(lists[v].len())) {
        let mut var_of = vec![usize::MAX; nh];
        for (i, &h) in frozen.iter().enumerate() {
            var_of[h] = i;
        }
        let variables = (0..frozen.len())
            .map(|id| VariableSpec {
                id,
                dist: Distribution::bits(),
            })
            .collect();
        let infeasible = |what: String| Error::Nonconvergence {
            what: Box::leak(what.into_boxed_str()),
            cap: 0,
        };
        let mut events = Vec::new();
        for v in 0..n {
            let kept = (off[v]..off[v + 1]).filter(|&h| fate[h] == Fate::Kept).count();
            let need = size(lists[v].len()).saturating_sub(kept);
            if need == 0 {
                continue;
            }
            let scope: Vec<usize> = (off[v]..off[v + 1]).filter(|&h| fate[h] == Fate::Frozen).map(|h| var_of[h]).collect();
            if scope.len() < need {
                return Err(infeasible(format!("list pruning: node {v} cannot reach its size bound")));
            }
            events.push(EventSpec {
                id: events.len(),
                predicate: Predicate::Threshold {
                    hits: vec![vec![1]; scope.len()],
                    bound: Bound::AtMost(need - 1),
                    require: Vec::new(),
                },
                scope,
            });
        }
        for v in 0..n {
            for h in off[v]..off[v + 1] {
                if !matches!(fate[h], Fate::Kept | Fate::Frozen) {
                    continue;
                }
                let q = color_of(h);
                let mut kept_nb = 0;
                let mut open_nb = Vec::new();
                for &u in g.neighbors(v) {
                    if let Some(hu) = index_of(u, q) {
                        match fate[hu] {
                            Fate::Kept => kept_nb += 1,
                            Fate::Frozen => open_nb.push(var_of[hu]),
                            _ => {}
                        }
                    }
                }
                if kept_nb + open_nb.len() <= bound {
                    continue;
                }
                let over = (bound + 1).saturating_sub(kept_nb);
                let mut scope = Vec::new();
                let mut hits = Vec::new();
                let mut require = Vec::new();
                if fate[h] == Fate::Frozen {
                    scope.push(var_of[h]);
                    hits.push(Vec::new());
                    require.push((0, 1));
                } else if over == 0 {
                    return Err(infeasible(format!("list pruning: color {q} at node {v} already over its bound")));
                }
                scope.extend(open_nb);
                hits.resize(scope.len(), vec![1]);
                events.push(EventSpec {
                    id: events.len(),
                    scope,
                    predicate: Predicate::Threshold {
                        hits,
                        bound: Bound::AtLeast(over),
                        require,
                    },
                });
            }
        }
        let inst = LLLInstance::new(variables, events)?;
        let mut l = RoundLedger::new();
        let out = solve_shattered(&inst, INNER_LAMBDA, &ctx.named("complete"), &mut l)?;
        ledger.absorb("prune/complete", &l);
        let vals = out.assignment.complete_values()?;
        for (i, &h) in frozen.iter().enumerate() {
            fate[h] = if vals[i] == 1 { Fate::Kept } else { Fate::Dropped };
        }
    }

    let new_lists: Vec<Vec<usize>> = (0..n)
        .map(|v| (off[v]..off[v + 1]).filter(|&h| fate[h] == Fate::Kept).map(color_of).collect())
        .collect();
    let l_new = new_lists.iter().map(Vec::len).min().unwrap_or(0);
    let next = ListState {
        lists: new_lists,
        l: l_new,
        c: if bound == 0 { f64::INFINITY } else { l_new as f64 / bound as f64 },
        frozen: Vec::new(),
    };
    let chk = check_pruning(g, state, &next);
    if !(chk.size_ok && chk.conflict_ok && chk.subset_ok) {
        return Err(Error::Invariant(format!("pruning bounds violated: {chk:?}")));
    }
    log::debug!("pruned with {} frozen choices", frozen_pairs.len());
    Ok(next)
}

/// Smallest color of `v` held by no neighbour.
fn private_color(g: &Graph, lists: &[Vec<usize>], v: usize) -> Option<usize> {
    lists[v]
        .iter()
        .copied()
        .find(|&q| g.neighbors(v).iter().all(|&u| lists[u].binary_search(&q).is_err()))
}

/// One color per node from its list by an LLL with an event per edge and
/// shared color.
fn finish_directly(g: &Graph, lists: &[Vec<usize>], ctx: &SeedContext, ledger: &mut RoundLedger) -> Result<Vec<usize>> {
    let variables = (0..g.n())
        .map(|id| VariableSpec {
            id,
            dist: Distribution::uniform_padded(lists[id].len() as u64),
        })
        .collect();
    let mut events = Vec::new();
    for (u, v) in g.edges() {
        for (i, q) in lists[u].iter().enumerate() {
            if let Ok(j) = lists[v].binary_search(q) {
                events.push(EventSpec {
                    id: events.len(),
                    scope: vec![u, v],
                    predicate: Predicate::Conjunction {
                        values: vec![i as u64, j as u64],
                    },
                });
            }
        }
    }
    let inst = LLLInstance::new(variables, events)?;
    let mut l = RoundLedger::new();
    let out = sample_and_repair(&inst, INNER_LAMBDA, ctx, &mut l)?;
    ledger.absorb("list/direct", &l);
    let vals = out.assignment.complete_values()?;
    Ok((0..g.n()).map(|v| lists[v][vals[v] as usize]).collect())
}

pub fn list_coloring(
    g: &Graph,
    lists: &[Vec<usize>],
    c: f64,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<ColoringResult> {
    list_coloring_with(g, lists, c, &ListConfig::default(), ctx, ledger)
}

/// Prunes the lists until every node owns a color none of its neighbours
/// holds, then takes the smallest such color.
pub fn list_coloring_with(
    g: &Graph,
    lists: &[Vec<usize>],
    c: f64,
    cfg: &ListConfig,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<ColoringResult> {
    if lists.len() != g.n() {
        return Err(Error::param(format!("{} lists for {} nodes", lists.len(), g.n())));
    }
    if let Some(v) = lists.iter().position(Vec::is_empty) {
        return Err(Error::param(format!("node {v} has an empty list")));
    }
    if c <= 0.0 {
        return Err(Error::param("C must be positive"));
    }
    let mut local = RoundLedger::new();
    let mut state = ListState::new(lists.to_vec(), c);
    if !state.entry_invariant_holds(g) {
        log::warn!("list conflicts exceed L/C on entry");
    }
    let cap = cfg
        .l_cap
        .unwrap_or_else(|| log2(g.n() as f64).powi(2).ceil() as usize)
        .max(1);
    if state.l > cap {
        let draw = ctx.named("downsample");
        for (v, l) in state.lists.iter_mut().enumerate() {
            let mut rng = draw.node_stream(v as u64, 0);
            let mut pick: Vec<usize> = l.choose_multiple(&mut rng, cap).copied().collect();
            pick.sort_unstable();
            *l = pick;
        }
        state.l = cap;
        local.charge("list/downsample", 1);
    }
    let l_min = (cfg.l_min_factor * c).ceil() as usize;
    let mut steps = Vec::new();
    let mut colors = None;
    for round in 0..cfg.max_rounds {
        local.charge(format!("list/finish-check{round}"), 1);
        let private: Vec<Option<usize>> = (0..g.n()).map(|v| private_color(g, &state.lists, v)).collect();
        if private.iter().all(Option::is_some) {
            colors = Some(private.into_iter().map(Option::unwrap).collect());
            break;
        }
        if state.l <= l_min || state.l < 2 {
            colors = Some(finish_directly(g, &state.lists, &ctx.named("direct"), &mut local)?);
            steps.push(StepRecord {
                stage: "direct".into(),
                delta_in: state.l,
                delta_out: 1,
                param: state.c,
                new_colors: 0,
            });
            break;
        }
        let before = state.l;
        state = prune_once_with(g, &state, cfg, &ctx.child(round as u64), &mut local)?;
        steps.push(StepRecord {
            stage: format!("prune{round}"),
            delta_in: before,
            delta_out: state.l,
            param: state.c,
            new_colors: 0,
        });
    }
    let colors: Vec<usize> = colors.ok_or(Error::Nonconvergence {
        what: "list coloring finishing condition",
        cap: cfg.max_rounds as u64,
    })?;
    if g.edges().any(|(u, v)| colors[u] == colors[v]) || (0..g.n()).any(|v| !lists[v].contains(&colors[v])) {
        return Err(Error::Invariant("list coloring output is not a proper list coloring".into()));
    }
    ledger.absorb("list", &local);
    let mut r = ColoringResult::new(colors, lists.iter().map(Vec::len).max().unwrap_or(0) as f64, local);
    r.steps = steps;
    Ok(r)
}
