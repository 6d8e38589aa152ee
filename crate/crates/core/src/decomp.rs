//! Network decompositions: ball carving, a phase-structured distributed
//! simulation of it, exact validation, and the shattering pipeline that
//! decomposes small leftover components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{component_lists, induced_diameter, ruling_set_within, Bfs, Graph, NodeSubset};
use crate::runtime::RoundLedger;

/// Partition of a node set into blocks whose components have bounded
/// diameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDecomposition {
    /// Sorted node lists.
    pub blocks: Vec<Vec<usize>>,
    pub claimed_c: usize,
    pub claimed_d: usize,
    /// An extra block was appended beyond `claimed_c`.
    pub cleanup_used: bool,
}

impl NetworkDecomposition {
    pub fn empty() -> Self {
        NetworkDecomposition {
            blocks: Vec::new(),
            claimed_c: 0,
            claimed_d: 0,
            cleanup_used: false,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_subsets(&self, universe: usize) -> Vec<NodeSubset> {
        self.blocks
            .iter()
            .map(|b| NodeSubset::from_nodes(universe, b.iter().copied()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub partition_ok: bool,
    pub overlapping: Vec<usize>,
    pub missing: Vec<usize>,
    pub extraneous: Vec<usize>,
    pub block_count: usize,
    pub claimed_c: usize,
    pub block_count_ok: bool,
    /// Largest component diameter per block.
    pub block_diameters: Vec<usize>,
    pub measured_d: usize,
    pub claimed_d: usize,
    pub diameter_ok: bool,
    pub passed: bool,
}

/// Checks `nd` against all nodes of `g`. The cleanup block, when flagged, is
/// allowed on top of `claimed_c`.
pub fn validate_decomposition(g: &Graph, nd: &NetworkDecomposition) -> DecompositionReport {
    validate_decomposition_on(g, nd, &g.all_nodes())
}

/// Checks `nd` as a decomposition of `g[s]`.
pub fn validate_decomposition_on(
    g: &Graph,
    nd: &NetworkDecomposition,
    s: &NodeSubset,
) -> DecompositionReport {
    let n = g.n();
    let mut count = vec![0u32; n];
    let mut extraneous = Vec::new();
    for &v in nd.blocks.iter().flatten() {
        if v >= n || !s.contains(v) {
            extraneous.push(v);
        } else {
            count[v] += 1;
        }
    }
    let overlapping: Vec<usize> = (0..n).filter(|&v| count[v] > 1).collect();
    let missing: Vec<usize> = s.iter().filter(|&v| count[v] == 0).collect();
    let partition_ok = overlapping.is_empty() && missing.is_empty() && extraneous.is_empty();
    let allowed = nd.claimed_c + nd.cleanup_used as usize;
    let block_count_ok = nd.blocks.len() <= allowed;
    let mut bfs = Bfs::new(n);
    let block_diameters: Vec<usize> = nd
        .blocks
        .iter()
        .map(|b| {
            let sub = NodeSubset::from_nodes(n, b.iter().copied().filter(|&v| v < n));
            component_lists(g, &sub)
                .iter()
                .map(|c| induced_diameter(g, c, &mut bfs).expect("components are connected"))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let measured_d = block_diameters.iter().copied().max().unwrap_or(0);
    let diameter_ok = measured_d <= nd.claimed_d;
    DecompositionReport {
        partition_ok,
        overlapping,
        missing,
        extraneous,
        block_count: nd.blocks.len(),
        claimed_c: nd.claimed_c,
        block_count_ok,
        block_diameters,
        measured_d,
        claimed_d: nd.claimed_d,
        diameter_ok,
        passed: partition_ok && block_count_ok && diameter_ok,
    }
}

/// Smallest integer `m` with `m^lambda >= n`.
pub fn carve_threshold(n: usize, lambda: usize) -> u64 {
    assert!(lambda >= 1);
    let n = n.max(1) as u128;
    let mut m = ((n as f64).powf(1.0 / lambda as f64).floor() as u128).max(1);
    while m.checked_pow(lambda as u32).is_some_and(|x| x > n) && m > 1 {
        m -= 1;
    }
    while m.checked_pow(lambda as u32).is_some_and(|x| x < n) {
        m += 1;
    }
    m as u64
}

/// `⌈n^{1/λ}·log₂ n⌉`, at least 1.
pub fn carve_radius_bound(n: usize, lambda: usize) -> usize {
    let n = n.max(1) as f64;
    ((n.powf(1.0 / lambda as f64) * n.log2()).ceil() as usize).max(1)
}

/// One carved ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Carving {
    pub block: usize,
    pub center: usize,
    /// Smallest radius passing the ratio test; the inner ball has radius
    /// `r_star - 1`.
    pub r_star: usize,
    pub inner: usize,
    pub boundary: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarveOutcome {
    pub decomposition: NetworkDecomposition,
    pub carvings: Vec<Carving>,
    pub threshold: u64,
}

impl CarveOutcome {
    pub fn max_radius(&self) -> usize {
        self.carvings.iter().map(|c| c.r_star).max().unwrap_or(0)
    }
}

/// How balls grow: plain hops in `g`, or hops in `g^d` without building it.
#[derive(Clone, Copy)]
enum Metric<'a> {
    Hop(&'a Graph),
    Power(&'a Graph, usize),
}

struct Grower {
    seen: Vec<u32>,
    epoch: u32,
    bfs: Bfs,
}

impl Grower {
    fn new(n: usize) -> Self {
        Grower {
            seen: vec![0; n],
            epoch: 0,
            bfs: Bfs::new(n),
        }
    }

    /// Layers of the ball around `v` in the metric restricted to `alive`,
    /// grown until the ratio test `m·|B_r| < (m+1)·|B_{r-1}|` passes
    /// (never at `r = 0`). Returns the layers `0..=r*`.
    fn grow(&mut self, metric: Metric, v: usize, alive: &[bool], m: u64) -> Vec<Vec<usize>> {
        self.epoch += 1;
        let ep = self.epoch;
        self.seen[v] = ep;
        let mut layers = vec![vec![v]];
        let mut prev: u64 = 1;
        loop {
            let frontier = layers.last().unwrap();
            let mut next = Vec::new();
            match metric {
                Metric::Hop(g) => {
                    for &x in frontier {
                        for &u in g.neighbors(x) {
                            if alive[u] && self.seen[u] != ep {
                                self.seen[u] = ep;
                                next.push(u);
                            }
                        }
                    }
                }
                Metric::Power(g, d) => {
                    let reach = multi_source_reach(&mut self.bfs, g, frontier, d);
                    for u in reach {
                        if alive[u] && self.seen[u] != ep {
                            self.seen[u] = ep;
                            next.push(u);
                        }
                    }
                }
            }
            next.sort_unstable();
            let cur = prev + next.len() as u64;
            layers.push(next);
            if (m as u128) * (cur as u128) < (m as u128 + 1) * (prev as u128) {
                return layers;
            }
            prev = cur;
        }
    }
}

/// Nodes within distance `d` of any source, through all of `g`.
fn multi_source_reach(bfs: &mut Bfs, g: &Graph, sources: &[usize], d: usize) -> Vec<usize> {
    bfs.run_multi(g, sources, d, |_| true).to_vec()
}

fn carve_impl(
    metric: Metric,
    n: usize,
    lambda: usize,
    n_param: usize,
    order: Option<&dyn Fn(&[usize], &[bool]) -> Vec<usize>>,
) -> Result<CarveOutcome> {
    if lambda == 0 {
        return Err(Error::param("lambda must be positive"));
    }
    let m = carve_threshold(n_param, lambda);
    let mut grower = Grower::new(n);
    let mut remainder: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::new();
    let mut carvings = Vec::new();
    let mut alive = vec![false; n];
    for epoch in 0..lambda {
        if remainder.is_empty() {
            break;
        }
        for &v in &remainder {
            alive[v] = true;
        }
        let mut block = Vec::new();
        let mut next = Vec::new();
        let centers = match order {
            Some(f) => f(&remainder, &alive),
            None => remainder.clone(),
        };
        for v in centers {
            if !alive[v] {
                continue;
            }
            let layers = grower.grow(metric, v, &alive, m);
            let r_star = layers.len() - 1;
            let inner: usize = layers[..r_star].iter().map(Vec::len).sum();
            let boundary = layers[r_star].len();
            if (m as u128) * (boundary as u128) >= inner as u128 {
                return Err(Error::Invariant(format!(
                    "carving at {v}: boundary {boundary} too large for inner {inner}"
                )));
            }
            for l in &layers[..r_star] {
                for &u in l {
                    alive[u] = false;
                    block.push(u);
                }
            }
            for &u in &layers[r_star] {
                alive[u] = false;
                next.push(u);
            }
            carvings.push(Carving {
                block: epoch,
                center: v,
                r_star,
                inner,
                boundary,
            });
        }
        block.sort_unstable();
        blocks.push(block);
        next.sort_unstable();
        remainder = next;
    }
    let cleanup_used = !remainder.is_empty();
    if cleanup_used {
        blocks.push(remainder);
    }
    let max_r = carvings.iter().map(|c| c.r_star).max().unwrap_or(1);
    let mut nd = NetworkDecomposition {
        blocks,
        claimed_c: lambda,
        claimed_d: 2 * max_r.saturating_sub(1),
        cleanup_used,
    };
    if cleanup_used {
        // stragglers carry no carving bound
        nd.claimed_d = usize::MAX;
    }
    Ok(CarveOutcome {
        decomposition: nd,
        carvings,
        threshold: m,
    })
}

/// Sequential ball carving into at most `lambda` blocks (plus a flagged
/// cleanup block if anything is left).
pub fn ball_carve(g: &Graph, lambda: usize) -> Result<NetworkDecomposition> {
    Ok(ball_carve_detailed(g, lambda, g.n())?.decomposition)
}

/// Ball carving with the node count used for the threshold supplied
/// separately, plus the per-ball log.
pub fn ball_carve_detailed(g: &Graph, lambda: usize, n_param: usize) -> Result<CarveOutcome> {
    let mut out = carve_impl(Metric::Hop(g), g.n(), lambda, n_param, None)?;
    if out.decomposition.cleanup_used {
        let report = validate_decomposition(g, &out.decomposition);
        out.decomposition.claimed_d = report.measured_d;
    }
    Ok(out)
}

/// Ball carving of `g^d` computed on `g` directly.
pub fn ball_carve_power(g: &Graph, d: usize, lambda: usize) -> Result<NetworkDecomposition> {
    let mut out = carve_impl(Metric::Power(g, d), g.n(), lambda, g.n(), None)?.decomposition;
    if out.cleanup_used {
        out.claimed_d = power_diameters(g, d, &out.blocks)
            .into_iter()
            .max()
            .unwrap_or(0);
    }
    Ok(out)
}

/// Components of `g^d[nodes]`, ordered by minimum id.
fn power_components(g: &Graph, d: usize, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut member = vec![false; g.n()];
    for &v in nodes {
        member[v] = true;
    }
    let mut done = vec![false; g.n()];
    let mut bfs = Bfs::new(g.n());
    let mut out = Vec::new();
    for &v in nodes {
        if done[v] {
            continue;
        }
        done[v] = true;
        let mut comp = vec![v];
        let mut frontier = vec![v];
        while !frontier.is_empty() {
            let reach = multi_source_reach(&mut bfs, g, &frontier, d);
            frontier = reach
                .into_iter()
                .filter(|&u| member[u] && !done[u])
                .collect();
            for &u in &frontier {
                done[u] = true;
            }
            comp.extend(&frontier);
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Largest `g^d[block]` component diameter, per block.
fn power_diameters(g: &Graph, d: usize, blocks: &[Vec<usize>]) -> Vec<usize> {
    let mut bfs = Bfs::new(g.n());
    blocks
        .iter()
        .map(|b| {
            power_components(g, d, b)
                .iter()
                .map(|c| {
                    let mut member = vec![false; g.n()];
                    for &v in c {
                        member[v] = true;
                    }
                    c.iter()
                        .map(|&v| {
                            let mut seen = vec![false; g.n()];
                            seen[v] = true;
                            let mut frontier = vec![v];
                            let mut ecc = 0;
                            loop {
                                let next: Vec<usize> = multi_source_reach(&mut bfs, g, &frontier, d)
                                    .into_iter()
                                    .filter(|&u| member[u] && !seen[u])
                                    .collect();
                                if next.is_empty() {
                                    break ecc;
                                }
                                for &u in &next {
                                    seen[u] = true;
                                }
                                ecc += 1;
                                frontier = next;
                            }
                        })
                        .max()
                        .unwrap_or(0)
                })
                .max()
                .unwrap_or(0)
        })
        .collect()
}

/// Hop distance used for the helper decomposition: `2·⌈n^{1/λ}log₂n⌉ + 1`.
pub fn helper_distance(n: usize, lambda: usize) -> usize {
    2 * carve_radius_bound(n, lambda) + 1
}

/// Default helper: ball carving of `g^d` with `⌈√log₂ n⌉` blocks.
pub fn default_helper(g: &Graph, lambda: usize) -> Result<NetworkDecomposition> {
    let n = g.n().max(2);
    let lambda_h = ((n as f64).log2().sqrt().ceil() as usize).max(1);
    ball_carve_power(g, helper_distance(g.n(), lambda), lambda_h)
}

/// Ball carving simulated phase by phase: in each epoch, helper blocks are
/// handled one after another, and inside a block every helper component's
/// minimum-id node carves for the component's nodes in ascending order.
pub fn ball_carve_distributed(
    g: &Graph,
    lambda: usize,
    helper: &NetworkDecomposition,
    ledger: &mut RoundLedger,
) -> Result<NetworkDecomposition> {
    let n = g.n();
    let d = helper_distance(n, lambda);
    // helper validity in g^d
    let mut count = vec![0u32; n];
    for &v in helper.blocks.iter().flatten() {
        if v >= n {
            return Err(Error::Validation(format!("helper names node {v} outside the graph")));
        }
        count[v] += 1;
    }
    if count.iter().any(|&c| c != 1) {
        return Err(Error::Validation("helper is not a partition of the nodes".into()));
    }
    if helper.blocks.len() > helper.claimed_c + helper.cleanup_used as usize {
        return Err(Error::Validation("helper has more blocks than claimed".into()));
    }
    let diam = power_diameters(g, d, &helper.blocks);
    if diam.iter().any(|&x| x > helper.claimed_d) {
        return Err(Error::Validation(format!(
            "helper component diameter {} exceeds claimed {}",
            diam.iter().max().unwrap(),
            helper.claimed_d
        )));
    }
    // Carving order: helper blocks in turn, components by min id, nodes
    // ascending inside a component.
    let mut order = Vec::with_capacity(n);
    for b in &helper.blocks {
        for comp in power_components(g, d, b) {
            order.extend(comp);
        }
    }
    let ordering = move |remainder: &[usize], _alive: &[bool]| {
        let mut inrem = vec![false; n];
        for &v in remainder {
            inrem[v] = true;
        }
        order.iter().copied().filter(|&v| inrem[v]).collect::<Vec<_>>()
    };
    let out = carve_impl(Metric::Hop(g), n, lambda, n, Some(&ordering))?;
    let radius = carve_radius_bound(n, lambda) as u64;
    let epochs = out.decomposition.blocks.len() - out.decomposition.cleanup_used as usize;
    for e in 0..epochs {
        for (i, _) in helper.blocks.iter().enumerate() {
            if g.m() > 0 {
                ledger.charge(
                    format!("carve-dist/epoch{e}/class{i}"),
                    helper.claimed_d as u64 * d as u64 + radius,
                );
            }
        }
    }
    let mut nd = out.decomposition;
    if nd.cleanup_used {
        nd.claimed_d = validate_decomposition(g, &nd).measured_d;
    }
    Ok(nd)
}

/// Separation of the ruling set used when shattering.
pub const SHATTER_ALPHA: usize = 11;
pub const SHATTER_BETA: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterOutcome {
    pub decomposition: NetworkDecomposition,
    pub rulers: Vec<usize>,
    pub cluster_radius: usize,
    pub carve_radius: usize,
    pub component_sizes: Vec<usize>,
}

/// Decomposes `g[b]`: rule, cluster to the nearest ruler, carve the cluster
/// graph, lift blocks back to nodes. `n_param` feeds the carving threshold.
pub fn shattered_decomposition_detailed(
    g: &Graph,
    b: &NodeSubset,
    lambda: usize,
    n_param: usize,
    ledger: &mut RoundLedger,
) -> Result<ShatterOutcome> {
    let n = g.n();
    if b.is_empty() {
        return Ok(ShatterOutcome {
            decomposition: NetworkDecomposition {
                claimed_c: lambda,
                ..NetworkDecomposition::empty()
            },
            rulers: Vec::new(),
            cluster_radius: 0,
            carve_radius: 0,
            component_sizes: Vec::new(),
        });
    }
    let component_sizes = component_lists(g, b).iter().map(Vec::len).collect();
    let rulers = ruling_set_within(g, b, SHATTER_ALPHA, SHATTER_BETA)?.to_vec();
    let loglog = ((n_param.max(4) as f64).log2().log2().ceil() as u64).max(1);
    ledger.charge("shatter/ruling-set", SHATTER_ALPHA as u64 * loglog);

    // Nearest ruler, ties to the smaller ruler id, layer by layer.
    let mut owner = vec![usize::MAX; n];
    let mut frontier: Vec<usize> = Vec::new();
    for (ci, &r) in rulers.iter().enumerate() {
        owner[r] = ci;
        frontier.push(r);
    }
    let mut cluster_radius = 0;
    loop {
        let mut claims: Vec<(usize, usize)> = Vec::new();
        for &x in &frontier {
            for &u in g.neighbors(x) {
                if b.contains(u) && owner[u] == usize::MAX {
                    claims.push((u, owner[x]));
                }
            }
        }
        if claims.is_empty() {
            break;
        }
        claims.sort_unstable();
        frontier.clear();
        for (u, c) in claims {
            if owner[u] == usize::MAX {
                owner[u] = c;
                frontier.push(u);
            }
        }
        cluster_radius += 1;
    }
    ledger.charge("shatter/cluster", cluster_radius as u64);

    let k = rulers.len();
    let contracted = Graph::from_edges_lossy(
        k,
        b.iter().flat_map(|v| {
            let owner = &owner;
            g.neighbors(v)
                .iter()
                .filter(move |&&u| b.contains(u))
                .map(move |&u| (owner[v], owner[u]))
        }),
    );
    let carve = ball_carve_detailed(&contracted, lambda, n_param.min(k).max(1))?;
    let carve_radius = carve.max_radius();
    let hop = 2 * cluster_radius as u64 + 1;
    for (e, _) in carve.decomposition.blocks.iter().enumerate() {
        let r = carve
            .carvings
            .iter()
            .filter(|c| c.block == e)
            .map(|c| c.r_star)
            .max()
            .unwrap_or(0);
        ledger.charge(format!("shatter/carve/epoch{e}"), r as u64 * hop);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in b.iter() {
        members[owner[v]].push(v);
    }
    let blocks: Vec<Vec<usize>> = carve
        .decomposition
        .blocks
        .iter()
        .map(|cb| {
            let mut l: Vec<usize> = cb.iter().flat_map(|&c| members[c].iter().copied()).collect();
            l.sort_unstable();
            l
        })
        .collect();
    let mut nd = NetworkDecomposition {
        blocks,
        claimed_c: lambda,
        claimed_d: 0,
        cleanup_used: carve.decomposition.cleanup_used,
    };
    let report = validate_decomposition_on(g, &nd, b);
    nd.claimed_d = report.measured_d;
    if !report.partition_ok || !report.block_count_ok {
        return Err(Error::Invariant(format!("shattered decomposition invalid: {report:?}")));
    }
    Ok(ShatterOutcome {
        decomposition: nd,
        rulers,
        cluster_radius,
        carve_radius,
        component_sizes,
    })
}

pub fn shattered_decomposition(
    g: &Graph,
    b: &NodeSubset,
    lambda: usize,
    ledger: &mut RoundLedger,
) -> Result<NetworkDecomposition> {
    Ok(shattered_decomposition_detailed(g, b, lambda, g.n(), ledger)?.decomposition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, grid, path};

    #[test]
    fn threshold_is_integer_root() {
        assert_eq!(carve_threshold(16, 2), 4);
        assert_eq!(carve_threshold(17, 2), 5);
        assert_eq!(carve_threshold(1000, 3), 10);
        assert_eq!(carve_threshold(1001, 3), 11);
        assert_eq!(carve_threshold(1, 4), 1);
    }

    #[test]
    fn single_node() {
        let out = ball_carve_detailed(&Graph::empty(1), 1, 1).unwrap();
        assert_eq!(out.decomposition.blocks, vec![vec![0]]);
        assert_eq!(out.carvings[0].r_star, 1);
    }

    #[test]
    fn complete_graph_one_ball() {
        let out = ball_carve_detailed(&complete(6), 1, 6).unwrap();
        assert_eq!(out.decomposition.blocks, vec![(0..6).collect::<Vec<_>>()]);
        assert_eq!(out.carvings[0].r_star, 2);
    }

    #[test]
    fn path16_worked_example() {
        let out = ball_carve_detailed(&path(16), 2, 16).unwrap();
        let first = &out.carvings[0];
        assert_eq!((first.center, first.r_star, first.inner), (0, 5, 5));
        let r = validate_decomposition(&path(16), &out.decomposition);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn validation_examples() {
        let g = path(4);
        let mut nd = NetworkDecomposition {
            blocks: vec![vec![0, 1, 2, 3]],
            claimed_c: 1,
            claimed_d: 3,
            cleanup_used: false,
        };
        assert!(validate_decomposition(&g, &nd).passed);
        nd.claimed_d = 2;
        let r = validate_decomposition(&g, &nd);
        assert!(!r.passed && r.measured_d == 3);
        nd.blocks = vec![vec![0, 1, 2], vec![2, 3]];
        nd.claimed_c = 2;
        nd.claimed_d = 3;
        assert!(!validate_decomposition(&g, &nd).partition_ok);
    }

    #[test]
    fn distributed_matches_sequential_with_trivial_helper() {
        let g = grid(5, 4);
        let helper = NetworkDecomposition {
            blocks: vec![(0..20).collect()],
            claimed_c: 1,
            claimed_d: 1,
            cleanup_used: false,
        };
        let mut ledger = RoundLedger::new();
        let dist = ball_carve_distributed(&g, 2, &helper, &mut ledger).unwrap();
        assert_eq!(dist, ball_carve(&g, 2).unwrap());
        assert!(ledger.total() > 0);
    }

    #[test]
    fn distributed_edgeless() {
        let g = Graph::empty(5);
        let helper = default_helper(&g, 2).unwrap();
        let mut ledger = RoundLedger::new();
        let nd = ball_carve_distributed(&g, 2, &helper, &mut ledger).unwrap();
        assert_eq!(nd.blocks, vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(ledger.total(), 0);
    }

    #[test]
    fn distributed_rejects_bad_helper() {
        let g = path(6);
        let helper = NetworkDecomposition {
            blocks: vec![vec![0, 1, 2]],
            claimed_c: 1,
            claimed_d: 5,
            cleanup_used: false,
        };
        let mut ledger = RoundLedger::new();
        assert!(matches!(
            ball_carve_distributed(&g, 2, &helper, &mut ledger),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn distributed_with_default_helper_is_valid() {
        let g = grid(12, 12);
        let helper = default_helper(&g, 2).unwrap();
        let mut ledger = RoundLedger::new();
        let nd = ball_carve_distributed(&g, 2, &helper, &mut ledger).unwrap();
        assert!(validate_decomposition(&g, &nd).passed);
    }

    #[test]
    fn shatter_examples() {
        let g = path(9);
        let mut ledger = RoundLedger::new();
        let nd = shattered_decomposition(&g, &NodeSubset::empty(9), 2, &mut ledger).unwrap();
        assert!(nd.blocks.is_empty());
        let one = NodeSubset::from_nodes(9, [4]);
        let nd = shattered_decomposition(&g, &one, 2, &mut ledger).unwrap();
        assert_eq!((nd.blocks.clone(), nd.claimed_d), (vec![vec![4]], 0));
        let all = g.all_nodes();
        let out = shattered_decomposition_detailed(&g, &all, 2, 9, &mut ledger).unwrap();
        let r = validate_decomposition(&g, &out.decomposition);
        assert!(r.passed, "{r:?}");
        let bound = 2 * (out.carve_radius + out.cluster_radius * (2 * out.carve_radius + 1));
        assert!(r.measured_d <= bound);
    }
}
