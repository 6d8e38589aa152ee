use rand::seq::SliceRandom;
use rayon::prelude::*;

use local_lll::colorings::{
    bucket_once, frugal_coloring, frugal_progress_step, prune_once, sample_partial_frugal, verify_coloring,
    ListState, PartialFrugal, VerifyMode,
};
use local_lll::generators::{complete, cycle, random_regular, star};
use local_lll::{Graph, RoundLedger, SeedContext};

fn random_lists(n: usize, len: usize, palette: usize, ctx: &SeedContext) -> Vec<Vec<usize>> {
    let mut rng = ctx.named("lists").stream();
    let all: Vec<usize> = (0..palette).collect();
    (0..n).map(|_| all.choose_multiple(&mut rng, len).copied().collect()).collect()
}

#[test]
fn bucketing_cubic_hundred_seeds() {
    let bad: Vec<u64> = (0..100u64)
        .into_par_iter()
        .filter(|&seed| {
            let ctx = SeedContext::new(seed);
            let g = random_regular(1_000, 3, &ctx).unwrap();
            match bucket_once(&g, 2, 3, &ctx, &mut RoundLedger::new()) {
                Ok(st) => st.max_same(&g) > 2 || st.bucket_of.iter().any(|&b| b >= 6),
                Err(_) => true,
            }
        })
        .collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn overflow_shrinks_with_slack() {
    // same first-stage draws for every threshold, so the overflow sets nest
    let g = random_regular(2_000, 16, &SeedContext::new(7)).unwrap();
    let mut rates = Vec::new();
    for delta_p in [6usize, 8, 10, 12] {
        let mut total = 0usize;
        for seed in 0..100u64 {
            let st = bucket_once(&g, delta_p, 4, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
            assert!(st.max_same(&g) <= delta_p);
            total += st.overflow.len();
        }
        rates.push(total as f64 / (100.0 * g.n() as f64));
    }
    assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    assert!(rates[3] < rates[0], "{rates:?}");
}

#[test]
fn partial_frugal_high_beta_only_needs_properness() {
    let g = cycle(30).unwrap();
    for seed in 0..20 {
        let s0 = PartialFrugal::new(g.n(), 2);
        let s = sample_partial_frugal(&g, &s0, 2, 2, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
        assert!(s.is_valid(&g));
        // a cycle never lets a node see three copies of a color
        for v in 0..g.n() {
            if let Some(c) = s.color_of[v] {
                assert!(g.neighbors(v).iter().all(|&u| s.color_of[u] != Some(c)));
            }
        }
    }
}

#[test]
fn progress_step_on_colored_graph_is_noop() {
    let g = cycle(12).unwrap();
    let mut s = PartialFrugal::new(g.n(), 1);
    for v in 0..g.n() {
        s.color_of[v] = Some(v % 3);
        s.uncolored.remove(v);
    }
    s.palette_watermark = 3;
    let out = frugal_progress_step(&g, &s, 2, 1, &SeedContext::new(3), &mut RoundLedger::new()).unwrap();
    assert_eq!(out, s);
}

#[test]
fn progress_step_meets_degree_bound() {
    for seed in 0..20u64 {
        let ctx = SeedContext::new(seed);
        let g = random_regular(1_000, 6, &ctx).unwrap();
        let s0 = PartialFrugal::new(g.n(), 2);
        let s = frugal_progress_step(&g, &s0, 6, 1, &ctx, &mut RoundLedger::new()).unwrap();
        assert!(s.is_valid(&g));
        let bound = (6.0f64 / 5.0).ceil() as usize;
        assert!(s.base_degree(&g) <= bound, "seed {seed}");
    }
}

#[test]
fn high_degree_nodes_are_rare_after_one_step() {
    let g = random_regular(1_000, 6, &SeedContext::new(11)).unwrap();
    let bound = (6.0f64 / 5.0).ceil() as usize;
    let empty = (0..100u64)
        .into_par_iter()
        .filter(|&seed| {
            let s0 = PartialFrugal::new(g.n(), 2);
            let s = sample_partial_frugal(&g, &s0, 6, 1, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
            (0..g.n()).all(|v| s.base_degree_of(&g, v) <= bound)
        })
        .count();
    assert!(empty > 50, "only {empty} of 100 seeds had no high-degree node");
}

#[test]
fn frugal_with_beta_at_least_degree() {
    for g in [cycle(9).unwrap(), complete(5), star(6)] {
        let beta = g.max_degree();
        let r = frugal_coloring(&g, beta, &SeedContext::new(1), &mut RoundLedger::new()).unwrap();
        assert!(verify_coloring(&g, &r, &VerifyMode::Frugal { beta }).passed);
    }
}

#[test]
fn prune_on_quartic_hundred_seeds() {
    let bad: Vec<u64> = (0..100u64)
        .into_par_iter()
        .filter(|&seed| {
            let ctx = SeedContext::new(seed);
            let g = random_regular(1_000, 4, &ctx).unwrap();
            let before = ListState::new(random_lists(g.n(), 64, 128, &ctx), 8.0);
            let Ok(after) = prune_once(&g, &before, &ctx, &mut RoundLedger::new()) else {
                return true;
            };
            let lg2 = 36.0;
            let cap = ((1.0 + 1.0 / lg2) * 64.0 / 16.0f64).ceil() as usize;
            !(0..g.n()).all(|v| {
                let kept = &after.lists[v];
                let need = ((before.lists[v].len() as f64 / 2.0) * (1.0 - 1.0 / lg2)).ceil() as usize;
                kept.len() >= need
                    && kept.iter().all(|q| before.lists[v].contains(q))
                    && kept
                        .iter()
                        .all(|q| g.neighbors(v).iter().filter(|&&u| after.lists[u].contains(q)).count() <= cap)
            })
        })
        .collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn edgeless_prune_keeps_half() {
    let g = Graph::empty(20);
    let before = ListState::new(vec![(0..32).collect(); 20], 2.0);
    let after = prune_once(&g, &before, &SeedContext::new(5), &mut RoundLedger::new()).unwrap();
    // ⌈16·(1 − 1/25)⌉
    assert!(after.lists.iter().all(|l| l.len() >= 16));
}
