use proptest::prelude::*;
use rand::Rng;

use local_lll::colorings::{
    bucket_once, defective_coloring, frugal_coloring, list_coloring, sample_partial_frugal, verify_coloring,
    PartialFrugal, VerifyMode,
};
use local_lll::decomp::{ball_carve_detailed, shattered_decomposition, validate_decomposition, validate_decomposition_on};
use local_lll::graph::{annulus_graph, bfs_distances, component_lists, components, distance_k_coloring, power_graph, ruling_set};
use local_lll::model::{Bound, Distribution, EventSpec, Predicate, VariableSpec};
use local_lll::solvers::{base_lll, moser_tardos, random_partial_setting, MtConfig};
use local_lll::{Graph, LLLInstance, NodeSubset, PartialAssignment, RoundLedger, SeedContext};

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..3 * n)
            .prop_map(move |edges| Graph::from_edges_lossy(n, edges.into_iter().filter(|(u, v)| u != v)))
    })
}

fn arb_subset(n: usize) -> impl Strategy<Value = NodeSubset> {
    proptest::collection::vec(any::<bool>(), n)
        .prop_map(move |bits| NodeSubset::from_nodes(n, (0..n).filter(|&v| bits[v])))
}

/// Random instance over small domains with conjunction and threshold
/// events.
fn arb_instance() -> impl Strategy<Value = (LLLInstance, u64)> {
    (2usize..12, 1usize..8, any::<u64>()).prop_map(|(nv, m, seed)| {
        let mut rng = SeedContext::new(seed).stream();
        let variables = (0..nv)
            .map(|id| VariableSpec {
                id,
                dist: if rng.gen_bool(0.5) {
                    Distribution::uniform(rng.gen_range(2..5))
                } else {
                    Distribution::bits()
                },
            })
            .collect::<Vec<_>>();
        let events = (0..m)
            .map(|id| {
                let k = rng.gen_range(1..=nv.min(5));
                let mut scope: Vec<usize> = (0..nv).collect();
                for i in 0..k {
                    let j = rng.gen_range(i..nv);
                    scope.swap(i, j);
                }
                scope.truncate(k);
                scope.sort_unstable();
                let predicate = if rng.gen_bool(0.5) {
                    Predicate::Conjunction {
                        values: scope.iter().map(|&v| rng.gen_range(0..variables[v].dist.domain())).collect(),
                    }
                } else {
                    let t = rng.gen_range(0..=k);
                    Predicate::Threshold {
                        hits: scope.iter().map(|&v| vec![rng.gen_range(0..variables[v].dist.domain())]).collect(),
                        bound: if rng.gen_bool(0.5) { Bound::AtLeast(t) } else { Bound::AtMost(t) },
                        require: Vec::new(),
                    }
                };
                EventSpec { id, scope, predicate }
            })
            .collect();
        (LLLInstance::new(variables, events).unwrap(), seed)
    })
}

fn random_partial(inst: &LLLInstance, seed: u64) -> PartialAssignment {
    let mut rng = SeedContext::new(seed).named("partial").stream();
    let mut pa = PartialAssignment::new(inst.num_vars());
    for v in 0..inst.num_vars() {
        if rng.gen_bool(0.5) {
            pa.assign(v, rng.gen_range(0..inst.variable(v).dist.domain()));
        }
    }
    pa
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_one_is_identity(g in arb_graph(30)) {
        prop_assert_eq!(power_graph(&g, 1).edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn annulus_from_one_is_power(g in arb_graph(30), k in 1usize..4) {
        let a = annulus_graph(&g, 1, k);
        let p = power_graph(&g, k);
        prop_assert_eq!(a.edges().collect::<Vec<_>>(), p.edges().collect::<Vec<_>>());
    }

    #[test]
    fn distance_coloring_is_proper_in_power(g in arb_graph(30), k in 1usize..4) {
        let colors = distance_k_coloring(&g, k);
        let p = power_graph(&g, k);
        for (u, v) in p.edges() {
            prop_assert_ne!(colors[u], colors[v]);
        }
        prop_assert!(colors.iter().all(|&c| c <= p.max_degree()));
    }

    #[test]
    fn ruling_set_distances(g in arb_graph(30), alpha in 2usize..5, extra in 0usize..3) {
        let beta = alpha - 1 + extra;
        let r = ruling_set(&g, alpha, beta).unwrap();
        let rulers = r.to_vec();
        let mut near = vec![usize::MAX; g.n()];
        for &x in &rulers {
            let dist = bfs_distances(&g, x);
            for &y in &rulers {
                if x != y {
                    prop_assert!(dist[y].is_none_or(|d| d >= alpha));
                }
            }
            for v in 0..g.n() {
                if let Some(d) = dist[v] {
                    near[v] = near[v].min(d);
                }
            }
        }
        prop_assert!(near.iter().all(|&d| d <= beta));
    }

    #[test]
    fn components_partition_the_subset((g, s) in arb_graph(30).prop_flat_map(|g| { let n = g.n(); (Just(g), arb_subset(n)) })) {
        let comps = components(&g, &s);
        let mut owner = vec![usize::MAX; g.n()];
        for (i, c) in comps.iter().enumerate() {
            for v in c.iter() {
                prop_assert_eq!(owner[v], usize::MAX);
                owner[v] = i;
            }
        }
        for v in 0..g.n() {
            prop_assert_eq!(owner[v] != usize::MAX, s.contains(v));
        }
        for (u, v) in g.edges() {
            if s.contains(u) && s.contains(v) {
                prop_assert_eq!(owner[u], owner[v]);
            }
        }
        // connected: a BFS inside the component reaches all of it
        for c in component_lists(&g, &s) {
            let sub = g.induced(&c);
            let dist = bfs_distances(&sub, 0);
            prop_assert!(dist.iter().all(Option::is_some));
        }
    }

    #[test]
    fn closed_forms_match_enumeration((inst, seed) in arb_instance()) {
        let pa = random_partial(&inst, seed);
        for e in 0..inst.num_events() {
            let a = inst.cond_prob(e, &pa).unwrap();
            let b = inst.cond_prob_enumerated(e, &pa).unwrap();
            prop_assert!((a - b).abs() <= 1e-10, "event {} closed {} enumerated {}", e, a, b);
        }
    }

    #[test]
    fn empty_and_full_conditioning((inst, seed) in arb_instance()) {
        let empty = PartialAssignment::new(inst.num_vars());
        let mut rng = SeedContext::new(seed).stream();
        let full = PartialAssignment::from_values(
            (0..inst.num_vars()).map(|v| rng.gen_range(0..inst.variable(v).dist.domain())).collect(),
        );
        for e in 0..inst.num_events() {
            prop_assert!((inst.cond_prob(e, &empty).unwrap() - inst.event_prob(e)).abs() <= 1e-12);
            let c = inst.cond_prob(e, &full).unwrap();
            prop_assert!(c == 0.0 || c == 1.0);
        }
        let p = (0..inst.num_events()).map(|e| inst.event_prob(e)).fold(0.0, f64::max);
        prop_assert!((inst.p() - p).abs() <= 1e-15);
        let d = (0..inst.num_events())
            .map(|e| {
                (0..inst.num_events())
                    .filter(|&f| f != e && inst.event(f).scope.iter().any(|v| inst.event(e).scope.contains(v)))
                    .count()
            })
            .max()
            .unwrap_or(0);
        prop_assert_eq!(inst.d(), d);
    }

    #[test]
    fn partial_setting_keeps_sqrt_p((inst, seed) in arb_instance()) {
        let pa = random_partial_setting(&inst, 8, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
        prop_assert!(pa.invariant_holds());
        let sqrt_p = inst.p().sqrt();
        for e in 0..inst.num_events() {
            prop_assert!(inst.cond_prob(e, &pa).unwrap() <= sqrt_p + 1e-10);
        }
    }

    #[test]
    fn solver_successes_avoid_every_event((inst, seed) in arb_instance()) {
        let ctx = SeedContext::new(seed);
        if let Ok(out) = moser_tardos(&inst, &ctx, &MtConfig { max_resamplings: 10_000 }) {
            prop_assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
        }
        if let Ok(out) = base_lll(&inst, 8, &ctx, &mut RoundLedger::new()) {
            prop_assert!(inst.violated_events(&out.assignment).unwrap().is_empty());
        }
    }

    #[test]
    fn runs_are_deterministic((inst, seed) in arb_instance()) {
        let ctx = SeedContext::new(seed);
        let a = base_lll(&inst, 8, &ctx, &mut RoundLedger::new()).ok();
        let b = base_lll(&inst, 8, &ctx, &mut RoundLedger::new()).ok();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn carved_blocks_are_valid(g in arb_graph(60), lambda in 1usize..4) {
        let out = ball_carve_detailed(&g, lambda, g.n()).unwrap();
        let rep = validate_decomposition(&g, &out.decomposition);
        prop_assert!(rep.passed, "{:?}", rep);
        prop_assert!(rep.measured_d <= 2 * out.max_radius().saturating_sub(1));
    }

    #[test]
    fn shattered_decomposition_validates((g, s) in arb_graph(60).prop_flat_map(|g| { let n = g.n(); (Just(g), arb_subset(n)) })) {
        let nd = shattered_decomposition(&g, &s, 2, &mut RoundLedger::new()).unwrap();
        let mut own = nd.clone();
        own.claimed_d = validate_decomposition_on(&g, &nd, &s).measured_d;
        prop_assert!(validate_decomposition_on(&g, &own, &s).partition_ok);
        prop_assert!(validate_decomposition_on(&g, &own, &s).diameter_ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bucketing_respects_delta_p(g in arb_graph(80), delta_p in 1usize..4, k in 1usize..5, seed in any::<u64>()) {
        // below this the fresh buckets may not exist at all
        prop_assume!(k * (delta_p + 1) > g.max_degree());
        if let Ok(st) = bucket_once(&g, delta_p, k, &SeedContext::new(seed), &mut RoundLedger::new()) {
            prop_assert!(st.max_same(&g) <= delta_p);
            prop_assert!(st.bucket_of.iter().all(|&b| b < 2 * k));
        }
    }

    #[test]
    fn defective_output_verifies(g in arb_graph(80), f in 0usize..5, seed in any::<u64>()) {
        let r = defective_coloring(&g, f, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
        let mode = VerifyMode::Defective { f };
        prop_assert!(verify_coloring(&g, &r, &mode).passed);
    }

    #[test]
    fn frugal_output_verifies(g in arb_graph(80), beta in 1usize..4, seed in any::<u64>()) {
        let r = frugal_coloring(&g, beta, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
        let mode = VerifyMode::Frugal { beta };
        prop_assert!(verify_coloring(&g, &r, &mode).passed);
        prop_assert!(r.watermark.is_some_and(|w| r.colors.iter().all(|&c| c < w)));
    }

    #[test]
    fn partial_frugal_stays_valid(g in arb_graph(80), beta in 1usize..4, x in 1usize..4, seed in any::<u64>()) {
        let s0 = PartialFrugal::new(g.n(), beta);
        let ctx = SeedContext::new(seed);
        let s1 = sample_partial_frugal(&g, &s0, g.max_degree().max(1), x, &ctx, &mut RoundLedger::new()).unwrap();
        prop_assert!(s1.is_valid(&g));
        prop_assert!(s1.color_of.iter().flatten().all(|&c| c < s1.palette_watermark));
        let s2 = sample_partial_frugal(&g, &s1, s1.base_degree(&g).max(1), x, &ctx.child(1), &mut RoundLedger::new()).unwrap();
        prop_assert!(s2.is_valid(&g));
        // later palettes start above everything handed out before
        for v in 0..g.n() {
            if s1.color_of[v].is_none() {
                prop_assert!(s2.color_of[v].is_none_or(|c| c >= s1.palette_watermark));
            }
        }
    }

    #[test]
    fn list_output_verifies(g in arb_graph(40), seed in any::<u64>()) {
        let mut rng = SeedContext::new(seed).stream();
        let lists: Vec<Vec<usize>> = (0..g.n())
            .map(|v| {
                let len = 4 * (g.degree(v) + 1) + rng.gen_range(0..3);
                let mut l: Vec<usize> = (0..3 * len).filter(|_| rng.gen_bool(0.5)).collect();
                l.extend(100..100 + len);
                l
            })
            .collect();
        let r = list_coloring(&g, &lists, 1.0, &SeedContext::new(seed), &mut RoundLedger::new()).unwrap();
        let mode = VerifyMode::List { lists };
        prop_assert!(verify_coloring(&g, &r, &mode).passed);
    }
}
