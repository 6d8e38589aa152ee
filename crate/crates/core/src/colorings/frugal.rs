use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ColoringResult, StepRecord, INNER_LAMBDA};
use crate::error::{Error, Result};
use crate::graph::{greedy_coloring, Graph, NodeSubset};
use crate::model::{Distribution, EventSpec, LLLInstance, Predicate, VariableSpec};
use crate::runtime::{RoundLedger, SeedContext};
use crate::solvers::solve_shattered;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialFrugal {
    pub color_of: Vec<Option<usize>>,
    pub uncolored: NodeSubset,
    pub beta: usize,
    /// Every color below this has been handed out in some palette.
    pub palette_watermark: usize,
}

impl PartialFrugal {
    pub fn new(n: usize, beta: usize) -> Self {
        PartialFrugal {
            color_of: vec![None; n],
            uncolored: NodeSubset::full(n),
            beta,
            palette_watermark: 0,
        }
    }

    /// Uncolored neighbours of `v`, counted in the whole graph.
    pub fn base_degree_of(&self, g: &Graph, v: usize) -> usize {
        g.neighbors(v).iter().filter(|&&u| self.uncolored.contains(u)).count()
    }

    pub fn base_degree(&self, g: &Graph) -> usize {
        (0..g.n()).map(|v| self.base_degree_of(g, v)).max().unwrap_or(0)
    }

    /// Proper on colored nodes, and no node sees a color more than `beta`
    /// times.
    pub fn is_valid(&self, g: &Graph) -> bool {
        let mut buf = Vec::new();
        (0..g.n()).all(|v| {
            if let Some(c) = self.color_of[v] {
                if g.neighbors(v).iter().any(|&u| self.color_of[u] == Some(c)) {
                    return false;
                }
            }
            buf.clear();
            buf.extend(g.neighbors(v).iter().filter_map(|&u| self.color_of[u]));
            buf.sort_unstable();
            buf.chunk_by(|a, b| a == b).all(|r| r.len() <= self.beta)
        })
    }

    fn check(&self, g: &Graph, what: &str) -> Result<()> {
        if self.is_valid(g) {
            Ok(())
        } else {
            Err(Error::Invariant(format!("partial frugal coloring broken after {what}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrugalConfig {
    /// Constant `c` in the stopping rule `Δ_i <= c·√Δ`.
    pub c: f64,
}

impl Default for FrugalConfig {
    fn default() -> Self {
        FrugalConfig { c: 1.0 }
    }
}

/// Size of one sampling palette.
fn palette_size(delta_p: usize, delta: usize, beta: usize) -> usize {
    (20.0 * delta_p.max(1) as f64 * (delta.max(1) as f64).powf(1.0 / beta as f64)).ceil() as usize
}

/// `x` sampling steps over the uncolored set, each from a fresh palette;
/// a node keeps its tentative color unless it closes a monochromatic edge
/// or a `(β+1)`-fold repeat in some neighbourhood.
pub fn sample_partial_frugal(
    g: &Graph,
    state: &PartialFrugal,
    delta_p: usize,
    x: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<PartialFrugal> {
    if x == 0 {
        return Err(Error::param("x must be at least 1"));
    }
    let beta = state.beta;
    let c = palette_size(delta_p, g.max_degree(), beta);
    let mut out = state.clone();
    let vprime: Vec<usize> = state.uncolored.iter().collect();
    let draw = ctx.named("frugal-sample");
    let mut tentative: Vec<Option<usize>> = vec![None; g.n()];
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for j in 0..x {
        let base = state.palette_watermark + j * c;
        for &v in &vprime {
            tentative[v] = Some(base + draw.node_stream(v as u64, j as u64).gen_range(0..c));
        }
        let mut lose = Vec::new();
        for &v in &vprime {
            if !out.uncolored.contains(v) {
                continue;
            }
            let cv = tentative[v];
            let mono = g.neighbors(v).iter().any(|&u| tentative[u] == cv);
            let crowded = !mono
                && g.neighbors(v).iter().any(|&u| {
                    g.neighbors(u)
                        .iter()
                        .filter(|&&w| w != v && tentative[w] == cv)
                        .count()
                        >= beta
                });
            if mono || crowded {
                lose.push(v);
            }
        }
        counts.push((vprime.len(), lose.len()));
        let lose = NodeSubset::from_nodes(g.n(), lose);
        for &v in &vprime {
            if out.uncolored.contains(v) && !lose.contains(v) {
                out.color_of[v] = tentative[v];
                out.uncolored.remove(v);
            }
        }
        ledger.charge(format!("frugal/sample/step{j}"), 2);
        out.check(g, "a sampling step")?;
    }
    out.palette_watermark = state.palette_watermark + x * c;
    Ok(out)
}

/// Colors every node of `nodes` from a fresh palette of `size` colors by an
/// LLL with one event per edge inside `nodes` and one per neighbourhood
/// holding more than `β` of them.
fn color_all(
    g: &Graph,
    state: &mut PartialFrugal,
    nodes: &[usize],
    size: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<()> {
    if nodes.is_empty() {
        return Ok(());
    }
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let variables = (0..nodes.len())
        .map(|id| VariableSpec {
            id,
            dist: Distribution::uniform(size as u64),
        })
        .collect();
    let mut events = Vec::new();
    for &v in nodes {
        for &u in g.neighbors(v) {
            if u > v && local[u] != usize::MAX {
                events.push(EventSpec {
                    id: events.len(),
                    scope: vec![local[v], local[u]],
                    predicate: Predicate::Agreement { at_least: 1 },
                });
            }
        }
    }
    for w in 0..g.n() {
        let scope: Vec<usize> = g.neighbors(w).iter().map(|&u| local[u]).filter(|&i| i != usize::MAX).collect();
        if scope.len() > state.beta {
            events.push(EventSpec {
                id: events.len(),
                scope,
                predicate: Predicate::Multiplicity {
                    at_least: state.beta + 1,
                },
            });
        }
    }
    let inst = LLLInstance::new(variables, events)?;
    let mut l = RoundLedger::new();
    let out = solve_shattered(&inst, INNER_LAMBDA, ctx, &mut l)?;
    ledger.absorb("frugal/color-all", &l);
    let vals = out.assignment.complete_values()?;
    for (i, &v) in nodes.iter().enumerate() {
        state.color_of[v] = Some(state.palette_watermark + vals[i] as usize);
        state.uncolored.remove(v);
    }
    state.palette_watermark += size;
    state.check(g, "an LLL coloring step")
}

/// Sampling followed by an LLL on the uncolored neighbours of every node
/// whose base-graph degree stayed above `⌈5^{-x}·delta_p⌉`. Afterwards no
/// node exceeds that bound.
pub fn frugal_progress_step(
    g: &Graph,
    state: &PartialFrugal,
    delta_p: usize,
    x: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<PartialFrugal> {
    frugal_progress_impl(g, state, delta_p, x, &FrugalConfig::default(), ctx, ledger).map(|(s, _)| s)
}

fn frugal_progress_impl(
    g: &Graph,
    state: &PartialFrugal,
    delta_p: usize,
    x: usize,
    cfg: &FrugalConfig,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<(PartialFrugal, usize)> {
    if state.uncolored.is_empty() {
        return Ok((state.clone(), 0));
    }
    let delta = g.max_degree();
    let shrink = 5f64.powi(-(x as i32)) * delta_p as f64;
    if shrink < cfg.c * (delta as f64).sqrt() {
        log::warn!("progress step with 5^-x·Δ' = {shrink:.3} below c·√Δ");
    }
    let target = shrink.ceil() as usize;
    let mut s = sample_partial_frugal(g, state, delta_p, x, &ctx.named("sample"), ledger)?;
    let high: Vec<usize> = (0..g.n()).filter(|&v| s.base_degree_of(g, v) > target).collect();
    let mut b = NodeSubset::empty(g.n());
    for &v in &high {
        for &u in g.neighbors(v) {
            if s.uncolored.contains(u) {
                b.insert(u);
            }
        }
    }
    ledger.charge("frugal/progress/detect", 2);
    let b = b.to_vec();
    let budget = x * palette_size(delta_p, delta, s.beta);
    color_all(g, &mut s, &b, budget, &ctx.named("progress"), ledger)?;
    let worst = s.base_degree(g);
    if worst > target {
        return Err(Error::Invariant(format!("base-graph degree {worst} above {target} after progress step")));
    }
    Ok((s, b.len()))
}

/// `β`-frugal coloring: progress steps with `x_{i+1} = ⌈(5/4)^{x_i}⌉` while
/// the base-graph degree is above `c·√Δ`, then one long sampling and an LLL
/// over whatever is left.
pub fn frugal_coloring(g: &Graph, beta: usize, ctx: &SeedContext, ledger: &mut RoundLedger) -> Result<ColoringResult> {
    frugal_coloring_with(g, beta, &FrugalConfig::default(), ctx, ledger)
}

pub fn frugal_coloring_with(
    g: &Graph,
    beta: usize,
    cfg: &FrugalConfig,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<ColoringResult> {
    if beta == 0 {
        return Err(Error::param("beta must be at least 1"));
    }
    let delta = g.max_degree();
    let cap = 120.0 * (delta as f64).powf(1.0 + 1.0 / beta as f64);
    let mut local = RoundLedger::new();
    if beta >= delta {
        let colors = greedy_coloring(g);
        local.charge("frugal/greedy", g.n() as u64);
        ledger.absorb("frugal", &local);
        let mut r = ColoringResult::new(colors, cap, local);
        r.watermark = Some(r.count);
        return Ok(r);
    }
    let mut state = PartialFrugal::new(g.n(), beta);
    let stop = cfg.c * (delta as f64).sqrt();
    let mut x = 1usize;
    let mut cur = delta;
    let mut clamped = false;
    let mut steps = Vec::new();
    let mut i = 0u64;
    while cur as f64 > stop {
        let next = (5f64.powi(-(x as i32)) * cur as f64).ceil() as usize;
        if next >= cur {
            clamped = true;
            break;
        }
        let before = state.palette_watermark;
        let (s, _) = frugal_progress_impl(g, &state, cur, x, cfg, &ctx.child(i), &mut local)?;
        state = s;
        steps.push(StepRecord {
            stage: format!("progress{i}"),
            delta_in: cur,
            delta_out: next,
            param: x as f64,
            new_colors: state.palette_watermark - before,
        });
        cur = next;
        x = 1.25f64.powi(x as i32).ceil() as usize;
        i += 1;
    }
    if !state.uncolored.is_empty() {
        let dp = state.base_degree(g).max(1);
        let xf = delta.div_ceil(dp);
        let before = state.palette_watermark;
        let fin = ctx.named("complete");
        state = sample_partial_frugal(g, &state, dp, xf, &fin, &mut local)?;
        let rest: Vec<usize> = state.uncolored.iter().collect();
        let size = xf * palette_size(dp, delta, beta);
        color_all(g, &mut state, &rest, size, &fin.named("lll"), &mut local)?;
        steps.push(StepRecord {
            stage: "complete".into(),
            delta_in: dp,
            delta_out: 0,
            param: xf as f64,
            new_colors: state.palette_watermark - before,
        });
    }
    let colors: Vec<usize> = state
        .color_of
        .iter()
        .map(|c| c.ok_or(Error::Invariant("frugal pipeline left a node uncolored".into())))
        .collect::<Result<_>>()?;
    ledger.absorb("frugal", &local);
    let mut r = ColoringResult::new(colors, cap, local);
    r.watermark = Some(state.palette_watermark);
    r.clamped = clamped;
    r.steps = steps;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::star;

    #[test]
    fn edgeless_single_step_colors_everything() {
        let g = Graph::empty(7);
        let s = sample_partial_frugal(&g, &PartialFrugal::new(7, 1), 1, 1, &SeedContext::new(0), &mut RoundLedger::new())
            .unwrap();
        assert!(s.uncolored.is_empty());
    }

    #[test]
    fn star_is_two_frugal() {
        let g = star(10);
        for seed in 0..20 {
            let r = frugal_coloring(&g, 2, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
            let mut seen = std::collections::HashMap::new();
            for &u in g.neighbors(0) {
                *seen.entry(r.colors[u]).or_insert(0) += 1;
            }
            assert!(seen.values().all(|&c| c <= 2));
            assert!(g.neighbors(0).iter().all(|&u| r.colors[u] != r.colors[0]));
        }
    }
}
