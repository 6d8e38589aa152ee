//! Deterministic graph families used by experiments and tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::runtime::SeedContext;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Path,
    Cycle,
    /// Square grid with side `⌈√n⌉`, truncated to `n` nodes row by row.
    Grid,
    Complete,
    Star,
    RandomRegular { d: usize },
    GnpCapped { p: f64, delta_cap: usize },
}

pub fn generate_graph(spec: &GraphSpec, n: usize, ctx: &SeedContext) -> Result<Graph> {
    match *spec {
        GraphSpec::Path => Ok(path(n)),
        GraphSpec::Cycle => cycle(n),
        GraphSpec::Grid => {
            let w = (n as f64).sqrt().ceil() as usize;
            Ok(grid_truncated(w.max(1), n))
        }
        GraphSpec::Complete => Ok(complete(n)),
        GraphSpec::Star => Ok(star(n.saturating_sub(1))),
        GraphSpec::RandomRegular { d } => random_regular(n, d, ctx),
        GraphSpec::GnpCapped { p, delta_cap } => gnp_capped(n, p, delta_cap, ctx),
    }
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges_lossy(n, (1..n).map(|i| (i - 1, i)))
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::param(format!("cycle needs n >= 3, got {n}")));
    }
    Ok(Graph::from_edges_lossy(n, (0..n).map(|i| (i, (i + 1) % n))))
}

/// `w × h` grid, node `(r, c)` has id `r·w + c`.
pub fn grid(w: usize, h: usize) -> Graph {
    grid_truncated(w, w * h)
}

fn grid_truncated(w: usize, n: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 0..n {
        if v % w + 1 < w && v + 1 < n {
            edges.push((v, v + 1));
        }
        if v + w < n {
            edges.push((v, v + w));
        }
    }
    Graph::from_edges_lossy(n, edges)
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges_lossy(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges_lossy(leaves + 1, (1..=leaves).map(|v| (0, v)))
}

const REGULAR_RESTARTS: usize = 1000;

/// Uniform-ish `d`-regular graph by the pairing model: points are matched
/// one random pair at a time, pairs that would create a loop or a repeated
/// edge are redrawn, and a stuck matching restarts.
pub fn random_regular(n: usize, d: usize, ctx: &SeedContext) -> Result<Graph> {
    if (n * d) % 2 == 1 {
        return Err(Error::param(format!("n·d must be even, got n={n} d={d}")));
    }
    if d >= n && n > 0 && d > 0 {
        return Err(Error::param(format!("need d < n, got n={n} d={d}")));
    }
    let mut rng = ctx.named("random_regular").stream();
    'restart: for _ in 0..REGULAR_RESTARTS {
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
        while !points.is_empty() {
            let mut tries = 0;
            loop {
                let i = rng.gen_range(0..points.len());
                let j = rng.gen_range(0..points.len());
                let (u, v) = (points[i], points[j]);
                if i != j && u != v && !adj[u].contains(&v) {
                    adj[u].push(v);
                    adj[v].push(u);
                    let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                    points.swap_remove(hi);
                    points.swap_remove(lo);
                    break;
                }
                tries += 1;
                if tries > 50 + 4 * points.len() {
                    continue 'restart;
                }
            }
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        return Ok(Graph::from_sorted_adjacency(adj));
    }
    Err(Error::Nonconvergence {
        what: "random regular pairing",
        cap: REGULAR_RESTARTS as u64,
    })
}

/// Erdős–Rényi `G(n, p)` followed by deleting, in edge order, any edge whose
/// endpoint already has `delta_cap` kept edges.
pub fn gnp_capped(n: usize, p: f64, delta_cap: usize, ctx: &SeedContext) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p must lie in [0,1], got {p}")));
    }
    let mut rng = ctx.named("gnp").stream();
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) && deg[u] < delta_cap && deg[v] < delta_cap {
                deg[u] += 1;
                deg[v] += 1;
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_families() {
        assert_eq!(path(5).m(), 4);
        assert_eq!(cycle(6).unwrap().m(), 6);
        assert!(cycle(2).is_err());
        let g = grid(4, 3);
        assert_eq!((g.n(), g.m(), g.max_degree()), (12, 17, 4));
        assert_eq!(complete(5).m(), 10);
        assert_eq!(star(10).max_degree(), 10);
    }

    #[test]
    fn random_regular_degrees() {
        for seed in 0..20 {
            let g = random_regular(10, 3, &SeedContext::new(seed)).unwrap();
            assert!((0..10).all(|v| g.degree(v) == 3));
        }
        let g = random_regular(1000, 8, &SeedContext::new(3)).unwrap();
        assert!((0..1000).all(|v| g.degree(v) == 8));
        assert!(random_regular(7, 3, &SeedContext::new(0)).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GraphSpec::RandomRegular { d: 4 };
        let a = generate_graph(&spec, 100, &SeedContext::new(9)).unwrap();
        let b = generate_graph(&spec, 100, &SeedContext::new(9)).unwrap();
        assert_eq!(a, b);
        let g = gnp_capped(200, 0.05, 3, &SeedContext::new(1)).unwrap();
        assert!(g.max_degree() <= 3);
    }
}
