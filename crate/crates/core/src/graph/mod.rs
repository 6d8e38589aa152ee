//! Undirected simple graphs over dense node ids and the distance-based
//! operations built on them.

mod subset;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use subset::NodeSubset;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
    max_degree: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            m: 0,
            max_degree: 0,
        }
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicate
    /// edges and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::param(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("duplicate edge at node {v}")));
            }
        }
        Ok(Self::from_sorted_adjacency(adj))
    }

    /// Adjacency lists must already be sorted, symmetric and loop-free.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let m = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        debug_assert!(adj.iter().enumerate().all(|(v, l)| {
            l.windows(2).all(|w| w[0] < w[1]) && l.iter().all(|&u| u != v)
        }));
        Graph { adj, m, max_degree }
    }

    /// Like `from_edges` but silently drops loops and repeated edges.
    pub fn from_edges_lossy<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_sorted_adjacency(adj)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn all_nodes(&self) -> NodeSubset {
        NodeSubset::full(self.n())
    }

    /// Subgraph induced by `nodes` (relabelled `0..nodes.len()` in the given
    /// order).
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let adj = nodes
            .iter()
            .map(|&v| {
                let mut l: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        Graph::from_sorted_adjacency(adj)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, m) = parse_pair(hl, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            if u >= v || v >= n {
                return Err(Error::Parse {
                    line,
                    msg: format!("edge must satisfy u < v < n, got {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, &edges).map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })
    }
}

fn parse_pair(line: usize, l: &str) -> Result<(usize, usize)> {
    let bad = |msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut it = l.split_whitespace();
    let a = it.next().ok_or_else(|| bad("expected two integers"))?;
    let b = it.next().ok_or_else(|| bad("expected two integers"))?;
    if it.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    let a = a.parse().map_err(|_| bad("not a nonnegative integer"))?;
    let b = b.parse().map_err(|_| bad("not a nonnegative integer"))?;
    Ok((a, b))
}

/// Reusable BFS scratch space; avoids an O(n) clear per search.
pub struct Bfs {
    stamp: Vec<u32>,
    dist: Vec<usize>,
    epoch: u32,
    order: Vec<usize>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs {
            stamp: vec![0; n],
            dist: vec![0; n],
            epoch: 0,
            order: Vec::new(),
        }
    }

    /// Visits every node within `radius` of `src`, moving only through nodes
    /// accepted by `allow`. Returns visited nodes in BFS order.
    pub fn run<F: Fn(usize) -> bool>(
        &mut self,
        g: &Graph,
        src: usize,
        radius: usize,
        allow: F,
    ) -> &[usize] {
        self.run_multi(g, &[src], radius, allow)
    }

    /// Like `run` but from several sources at distance 0.
    pub fn run_multi<F: Fn(usize) -> bool>(
        &mut self,
        g: &Graph,
        sources: &[usize],
        radius: usize,
        allow: F,
    ) -> &[usize] {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.order.clear();
        for &s in sources {
            if self.stamp[s] != self.epoch {
                self.stamp[s] = self.epoch;
                self.dist[s] = 0;
                self.order.push(s);
            }
        }
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            let dv = self.dist[v];
            if dv == radius {
                continue;
            }
            for &u in g.neighbors(v) {
                if self.stamp[u] != self.epoch && allow(u) {
                    self.stamp[u] = self.epoch;
                    self.dist[u] = dv + 1;
                    self.order.push(u);
                }
            }
        }
        &self.order
    }

    /// Distance from the last source, valid for nodes visited by the last run.
    pub fn dist(&self, v: usize) -> Option<usize> {
        (self.stamp[v] == self.epoch).then(|| self.dist[v])
    }

    pub fn visited(&self) -> &[usize] {
        &self.order
    }
}

/// Graph on the same nodes with an edge wherever `1 <= dist <= k`.
pub fn power_graph(g: &Graph, k: usize) -> Graph {
    assert!(k >= 1, "power_graph needs k >= 1");
    annulus_graph(g, 1, k)
}

/// Graph on the same nodes with an edge wherever `a <= dist <= b`.
pub fn annulus_graph(g: &Graph, a: usize, b: usize) -> Graph {
    assert!(1 <= a && a <= b, "annulus_graph needs 1 <= a <= b");
    if a == 1 && b == 1 {
        return g.clone();
    }
    let mut bfs = Bfs::new(g.n());
    let adj = (0..g.n())
        .map(|v| {
            bfs.run(g, v, b, |_| true);
            let mut l: Vec<usize> = bfs
                .visited()
                .iter()
                .copied()
                .filter(|&u| bfs.dist(u).unwrap() >= a)
                .collect();
            l.sort_unstable();
            l
        })
        .collect();
    Graph::from_sorted_adjacency(adj)
}

/// Connected components of `g[s]`, each as a sorted node list, ordered by
/// minimum node id.
pub fn component_lists(g: &Graph, s: &NodeSubset) -> Vec<Vec<usize>> {
    let mut seen = NodeSubset::empty(g.n());
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for v in s.iter() {
        if seen.contains(v) {
            continue;
        }
        seen.insert(v);
        stack.push(v);
        let mut comp = Vec::new();
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &u in g.neighbors(x) {
                if s.contains(u) && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn components(g: &Graph, s: &NodeSubset) -> Vec<NodeSubset> {
    component_lists(g, s)
        .into_iter()
        .map(|c| NodeSubset::from_nodes(g.n(), c))
        .collect()
}

pub fn ball(g: &Graph, v: usize, r: usize) -> NodeSubset {
    let mut bfs = Bfs::new(g.n());
    NodeSubset::from_nodes(g.n(), bfs.run(g, v, r, |_| true).iter().copied())
}

/// Single-source distances (`None` when unreachable).
pub fn bfs_distances(g: &Graph, src: usize) -> Vec<Option<usize>> {
    let mut bfs = Bfs::new(g.n());
    bfs.run(g, src, usize::MAX, |_| true);
    (0..g.n()).map(|v| bfs.dist(v)).collect()
}

/// Greedy proper coloring of `g` in ascending id order, smallest free color.
pub fn greedy_coloring(g: &Graph) -> Vec<usize> {
    let mut color = vec![usize::MAX; g.n()];
    let mut used = Vec::new();
    for v in 0..g.n() {
        used.clear();
        used.resize(g.degree(v) + 1, false);
        for &u in g.neighbors(v) {
            let c = color[u];
            if c < used.len() {
                used[c] = true;
            }
        }
        color[v] = used.iter().position(|&b| !b).unwrap();
    }
    color
}

/// Proper coloring of `g^k` by greedy in ascending id order.
pub fn distance_k_coloring(g: &Graph, k: usize) -> Vec<usize> {
    assert!(k >= 1);
    if k == 1 {
        return greedy_coloring(g);
    }
    greedy_coloring(&power_graph(g, k))
}

/// Greedy `(alpha, beta)`-ruling set: members are pairwise at distance
/// `>= alpha`, and every node is within `alpha - 1 <= beta` of a member.
pub fn ruling_set(g: &Graph, alpha: usize, beta: usize) -> Result<NodeSubset> {
    ruling_set_within(g, &g.all_nodes(), alpha, beta)
}

/// Ruling set of `g[s]` (distances measured inside `g[s]`).
pub fn ruling_set_within(
    g: &Graph,
    s: &NodeSubset,
    alpha: usize,
    beta: usize,
) -> Result<NodeSubset> {
    if alpha < 2 {
        return Err(Error::param(format!("ruling set needs alpha >= 2, got {alpha}")));
    }
    if beta + 1 < alpha {
        return Err(Error::param(format!(
            "ruling set needs beta >= alpha - 1, got alpha={alpha} beta={beta}"
        )));
    }
    let mut blocked = NodeSubset::empty(g.n());
    let mut out = NodeSubset::empty(g.n());
    let mut bfs = Bfs::new(g.n());
    for v in s.iter() {
        if blocked.contains(v) {
            continue;
        }
        out.insert(v);
        for &u in bfs.run(g, v, alpha - 1, |u| s.contains(u)) {
            blocked.insert(u);
        }
    }
    Ok(out)
}

/// Largest eccentricity inside `g[nodes]`; `None` if `g[nodes]` is
/// disconnected. Empty and single-node sets have diameter 0.
pub fn induced_diameter(g: &Graph, nodes: &[usize], bfs: &mut Bfs) -> Option<usize> {
    if nodes.len() <= 1 {
        return Some(0);
    }
    let mut member = std::collections::HashSet::with_capacity(nodes.len());
    member.extend(nodes.iter().copied());
    let mut best = 0;
    for &v in nodes {
        let seen = bfs.run(g, v, usize::MAX, |u| member.contains(&u));
        if seen.len() != nodes.len() {
            return None;
        }
        let far = *seen.last().unwrap();
        best = best.max(bfs.dist(far).unwrap());
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    fn edge_set(g: &Graph) -> Vec<(usize, usize)> {
        g.edges().collect()
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn power_graph_examples() {
        let p = path(3);
        assert_eq!(power_graph(&p, 1), p);
        assert_eq!(edge_set(&power_graph(&p, 2)), vec![(0, 1), (0, 2), (1, 2)]);
        let k5 = power_graph(&cycle(5), 2);
        assert_eq!(k5.m(), 10);
        assert_eq!(k5.max_degree(), 4);
    }

    #[test]
    fn annulus_examples() {
        let p = path(5);
        assert_eq!(annulus_graph(&p, 1, 1), p);
        assert_eq!(
            edge_set(&annulus_graph(&p, 2, 3)),
            vec![(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)]
        );
        assert_eq!(annulus_graph(&Graph::empty(1), 2, 5).m(), 0);
    }

    #[test]
    fn components_examples() {
        let p = path(4);
        assert!(components(&p, &NodeSubset::empty(4)).is_empty());
        assert_eq!(components(&p, &p.all_nodes()), vec![p.all_nodes()]);
        let s = NodeSubset::from_nodes(4, [0, 1, 3]);
        assert_eq!(component_lists(&p, &s), vec![vec![0, 1], vec![3]]);
    }

    #[test]
    fn ball_examples() {
        let p = path(4);
        assert_eq!(ball(&p, 2, 0).to_vec(), vec![2]);
        assert_eq!(ball(&p, 1, 1).to_vec(), vec![0, 1, 2]);
        assert_eq!(ball(&cycle(6), 0, 2).to_vec(), vec![0, 1, 2, 4, 5]);
    }

    #[test]
    fn distance_coloring_examples() {
        assert_eq!(distance_k_coloring(&Graph::empty(4), 3), vec![0; 4]);
        assert_eq!(distance_k_coloring(&path(3), 2), vec![0, 1, 2]);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(distance_k_coloring(&star, 2), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ruling_set_examples() {
        assert_eq!(ruling_set(&Graph::empty(3), 3, 2).unwrap().len(), 3);
        let k4 = power_graph(&path(4), 3);
        assert_eq!(ruling_set(&k4, 2, 1).unwrap().to_vec(), vec![0]);
        assert_eq!(ruling_set(&path(5), 2, 1).unwrap().to_vec(), vec![0, 2, 4]);
        assert!(ruling_set(&path(5), 1, 1).is_err());
        assert!(ruling_set(&path(5), 4, 2).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = cycle(5);
        let text = g.to_edge_list();
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        assert!(Graph::parse_edge_list("3 1\n1 1\n").is_err());
        assert!(Graph::parse_edge_list("3 2\n0 1\n0 1\n").is_err());
        assert!(Graph::parse_edge_list("3 1\n2 1\n").is_err());
        assert!(Graph::parse_edge_list("3 2\n0 1\n").is_err());
    }

    #[test]
    fn diameters() {
        let mut bfs = Bfs::new(6);
        let c = cycle(6);
        assert_eq!(induced_diameter(&c, &[0, 1, 2, 3, 4, 5], &mut bfs), Some(3));
        assert_eq!(induced_diameter(&c, &[0, 1, 2, 3], &mut bfs), Some(3));
        assert_eq!(induced_diameter(&c, &[0, 3], &mut bfs), None);
    }
}
