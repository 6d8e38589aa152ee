use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{log2, ColoringResult, StepRecord, INNER_LAMBDA};
use crate::error::{Error, Result};
use crate::graph::{greedy_coloring, Graph, NodeSubset};
use crate::instances::bucketing_instance;
use crate::runtime::{RoundLedger, SeedContext};
use crate::solvers::solve_shattered;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketState {
    pub bucket_of: Vec<usize>,
    /// Nodes that exceeded `delta_p` after the random step; they end in
    /// buckets `k..2k`.
    pub overflow: NodeSubset,
    pub k: usize,
    pub delta_p: usize,
}

impl BucketState {
    /// Largest number of same-bucket neighbours.
    pub fn max_same(&self, g: &Graph) -> usize {
        (0..g.n()).map(|v| same_bucket(g, &self.bucket_of, v)).max().unwrap_or(0)
    }
}

fn same_bucket(g: &Graph, bucket: &[usize], v: usize) -> usize {
    g.neighbors(v).iter().filter(|&&u| bucket[u] == bucket[v]).count()
}

/// Random bucket in `0..k` per node; nodes with more than `delta_p`
/// same-bucket neighbours are moved to fresh buckets `k..2k` chosen by an
/// LLL over the subgraph they induce.
pub fn bucket_once(
    g: &Graph,
    delta_p: usize,
    k: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<BucketState> {
    if k == 0 || delta_p == 0 {
        return Err(Error::param(format!("need k >= 1 and delta_p >= 1, got k={k} delta_p={delta_p}")));
    }
    let draw = ctx.named("bucket");
    let mut bucket: Vec<usize> = (0..g.n())
        .map(|v| draw.node_stream(v as u64, 0).gen_range(0..k))
        .collect();
    ledger.charge("bucket/sample", 1);
    let over: Vec<usize> = (0..g.n()).filter(|&v| same_bucket(g, &bucket, v) > delta_p).collect();
    ledger.charge("bucket/overflow", 1);
    if !over.is_empty() {
        let inst = bucketing_instance(g, k as u64, delta_p + 1, Some(&over))?;
        let mut local = RoundLedger::new();
        let out = solve_shattered(&inst, INNER_LAMBDA, &ctx.named("bucket-lll"), &mut local)?;
        ledger.absorb("bucket", &local);
        let vals = out.assignment.complete_values()?;
        for (i, &v) in over.iter().enumerate() {
            bucket[v] = k + vals[i] as usize;
        }
    }
    let st = BucketState {
        bucket_of: bucket,
        overflow: NodeSubset::from_nodes(g.n(), over),
        k,
        delta_p,
    };
    let worst = st.max_same(g);
    if worst > delta_p {
        return Err(Error::Invariant(format!(
            "bucketing left {worst} same-bucket neighbours, allowed {delta_p}"
        )));
    }
    Ok(st)
}

/// `f`-defective coloring by iterated bucketing. Each step splits every
/// current color class into buckets whose induced degree is at most the
/// next schedule value; the final step targets `f`.
pub fn defective_coloring(g: &Graph, f: usize, ctx: &SeedContext, ledger: &mut RoundLedger) -> Result<ColoringResult> {
    let delta = g.max_degree();
    let mut local = RoundLedger::new();
    if f >= delta {
        let mut r = ColoringResult::new(vec![0; g.n()], 1.0, local);
        r.steps.push(StepRecord {
            stage: "single-color".into(),
            delta_in: delta,
            delta_out: delta,
            param: 1.0,
            new_colors: 1,
        });
        return Ok(r);
    }
    if f == 0 {
        let colors = greedy_coloring(g);
        local.charge("defective/greedy", g.n() as u64);
        ledger.absorb("defective", &local);
        let mut r = ColoringResult::new(colors, (delta + 1) as f64, local);
        r.steps.push(StepRecord {
            stage: "greedy".into(),
            delta_in: delta,
            delta_out: 0,
            param: 0.0,
            new_colors: r.count,
        });
        return Ok(r);
    }
    let mut raw: Vec<u128> = vec![0; g.n()];
    let mut h = g.clone();
    let mut prev = delta;
    let mut cap = 1.0f64;
    let mut clamped = false;
    let mut steps = Vec::new();
    for i in 0.. {
        let next = log2(prev as f64).powi(5).ceil() as usize;
        let target = if next >= prev || next <= f {
            clamped |= next >= prev;
            f
        } else {
            next
        };
        let eps = log2(prev as f64).powi(2) / (target as f64).sqrt();
        let k = ((1.0 + eps) * prev as f64 / target as f64).ceil() as usize;
        let st = bucket_once(&h, target, k, &ctx.child(i as u64), &mut local)?;
        for (r, &b) in raw.iter_mut().zip(&st.bucket_of) {
            *r = *r * (2 * k) as u128 + b as u128;
        }
        cap *= (2 * k) as f64;
        steps.push(StepRecord {
            stage: format!("bucket{i}"),
            delta_in: prev,
            delta_out: target,
            param: k as f64,
            new_colors: 2 * k,
        });
        h = Graph::from_edges_lossy(g.n(), h.edges().filter(|&(u, v)| st.bucket_of[u] == st.bucket_of[v]));
        prev = target;
        if target == f {
            break;
        }
    }
    let mut sorted = raw.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let colors: Vec<usize> = raw.iter().map(|r| sorted.binary_search(r).unwrap()).collect();
    let worst = (0..g.n())
        .map(|v| g.neighbors(v).iter().filter(|&&u| colors[u] == colors[v]).count())
        .max()
        .unwrap_or(0);
    if worst > f {
        return Err(Error::Invariant(format!("defect {worst} exceeds {f}")));
    }
    ledger.absorb("defective", &local);
    let mut r = ColoringResult::new(colors, cap, local);
    r.clamped = clamped;
    r.steps = steps;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, random_regular};

    #[test]
    fn trivial_buckets() {
        let g = cycle(6).unwrap();
        let st = bucket_once(&g, 2, 1, &SeedContext::new(0), &mut RoundLedger::new()).unwrap();
        assert!(st.bucket_of.iter().all(|&b| b == 0));
        assert!(st.overflow.is_empty());
        let e = Graph::empty(5);
        let st = bucket_once(&e, 1, 3, &SeedContext::new(0), &mut RoundLedger::new()).unwrap();
        assert!(st.overflow.is_empty());
    }

    #[test]
    fn bucketing_on_cubic_graphs() {
        for seed in 0..100 {
            let ctx = SeedContext::new(seed);
            let g = random_regular(1000, 3, &ctx).unwrap();
            let st = bucket_once(&g, 2, 3, &ctx, &mut RoundLedger::new()).unwrap();
            assert!(st.max_same(&g) <= 2);
            assert!(st.bucket_of.iter().all(|&b| b < 6));
        }
    }

    #[test]
    fn defective_examples() {
        let g = cycle(6).unwrap();
        let r = defective_coloring(&g, 2, &SeedContext::new(1), &mut RoundLedger::new()).unwrap();
        assert_eq!(r.count, 1);
        let r = defective_coloring(&g, 0, &SeedContext::new(1), &mut RoundLedger::new()).unwrap();
        assert!(r.count <= 3);
        assert!((0..6).all(|v| r.colors[v] != r.colors[(v + 1) % 6]));
    }
}
