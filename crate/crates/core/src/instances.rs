//! Benchmark LLL instance families.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::random_regular;
use crate::graph::Graph;
use crate::model::{Distribution, EventSpec, LLLInstance, Predicate, VariableSpec};
use crate::runtime::SeedContext;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceSpec {
    /// Overlapping windows of a line of variables, each a conjunction.
    ConjunctionChain { domain: u64, scope: usize, stride: usize },
    /// Every variable in exactly two random events of `k` variables.
    SparseConjunction { domain: u64, k: usize },
    /// One agreement event per node of a random regular graph over the
    /// closed neighbourhood's bucket choices.
    Bucketing { degree: usize, buckets: u64, at_least: usize },
    /// Variables on the edges of a random regular graph; each node forbids
    /// one joint value of its incident edges. The dependency graph is the
    /// regular graph itself.
    EdgeConjunction { degree: usize, domain: u64 },
}

impl InstanceSpec {
    pub fn conjunction_chain() -> Self {
        InstanceSpec::ConjunctionChain {
            domain: 256,
            scope: 11,
            stride: 10,
        }
    }

    pub fn sparse_conjunction() -> Self {
        InstanceSpec::SparseConjunction { domain: 1 << 16, k: 10 }
    }

    pub fn bucketing() -> Self {
        InstanceSpec::Bucketing {
            degree: 3,
            buckets: 1 << 50,
            at_least: 3,
        }
    }
}

/// Builds an instance with `n` events.
pub fn generate_instance(spec: &InstanceSpec, n: usize, ctx: &SeedContext) -> Result<LLLInstance> {
    match *spec {
        InstanceSpec::ConjunctionChain { domain, scope, stride } => conjunction_chain(n, domain, scope, stride, ctx),
        InstanceSpec::SparseConjunction { domain, k } => sparse_conjunction(n, domain, k, ctx),
        InstanceSpec::Bucketing {
            degree,
            buckets,
            at_least,
        } => {
            let g = random_regular(n, degree, ctx)?;
            bucketing_instance(&g, buckets, at_least, None)
        }
        InstanceSpec::EdgeConjunction { degree, domain } => {
            let g = random_regular(n, degree, ctx)?;
            edge_conjunction(&g, domain, ctx)
        }
    }
}

fn uniform_vars(n: usize, domain: u64) -> Vec<VariableSpec> {
    (0..n)
        .map(|id| VariableSpec {
            id,
            dist: Distribution::uniform(domain),
        })
        .collect()
}

pub fn conjunction_chain(n: usize, domain: u64, scope: usize, stride: usize, ctx: &SeedContext) -> Result<LLLInstance> {
    if stride == 0 || stride > scope {
        return Err(Error::param(format!("need 0 < stride <= scope, got {stride} > {scope}")));
    }
    let mut rng = ctx.named("conjunction_chain").stream();
    let nv = if n == 0 { 0 } else { (n - 1) * stride + scope };
    let events = (0..n)
        .map(|i| EventSpec {
            id: i,
            scope: (i * stride..i * stride + scope).collect(),
            predicate: Predicate::Conjunction {
                values: (0..scope).map(|_| rng.gen_range(0..domain)).collect(),
            },
        })
        .collect();
    LLLInstance::new(uniform_vars(nv, domain), events)
}

pub fn sparse_conjunction(n: usize, domain: u64, k: usize, ctx: &SeedContext) -> Result<LLLInstance> {
    if (n * k) % 2 == 1 {
        return Err(Error::param(format!("n·k must be even, got n={n} k={k}")));
    }
    if k > n && n > 0 {
        return Err(Error::param(format!("need k <= n, got n={n} k={k}")));
    }
    let mut rng = ctx.named("sparse_conjunction").stream();
    let nv = n * k / 2;
    // slot j of event e holds variable slots[e*k + j]
    let mut slots: Vec<usize> = (0..nv).flat_map(|v| [v, v]).collect();
    for _ in 0..1000 {
        slots.shuffle(&mut rng);
        // repair repeats inside an event by swapping with a random slot
        let mut ok = true;
        for _ in 0..100 * (n + 1) {
            let bad = (0..n).find_map(|e| {
                let s = &slots[e * k..(e + 1) * k];
                (0..k).find(|&j| s[..j].contains(&s[j])).map(|j| e * k + j)
            });
            match bad {
                None => {
                    ok = true;
                    break;
                }
                Some(i) => {
                    let j = rng.gen_range(0..slots.len());
                    slots.swap(i, j);
                    ok = false;
                }
            }
        }
        if ok {
            let events = (0..n)
                .map(|e| EventSpec {
                    id: e,
                    scope: slots[e * k..(e + 1) * k].to_vec(),
                    predicate: Predicate::Conjunction {
                        values: (0..k).map(|_| rng.gen_range(0..domain)).collect(),
                    },
                })
                .collect();
            return LLLInstance::new(uniform_vars(nv, domain), events);
        }
    }
    Err(Error::Nonconvergence {
        what: "sparse conjunction pairing",
        cap: 1000,
    })
}

/// One event per node: at least `at_least` neighbours share the node's
/// bucket. Variable `v` is node `v`'s bucket. With `nodes` given, events
/// and variables are restricted to those nodes (ids stay local).
pub fn bucketing_instance(g: &Graph, buckets: u64, at_least: usize, nodes: Option<&[usize]>) -> Result<LLLInstance> {
    let all: Vec<usize>;
    let nodes = match nodes {
        Some(s) => s,
        None => {
            all = (0..g.n()).collect();
            &all
        }
    };
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let mut events = Vec::new();
    for &v in nodes {
        let nb: Vec<usize> = g.neighbors(v).iter().map(|&u| local[u]).filter(|&u| u != usize::MAX).collect();
        if nb.len() < at_least || at_least == 0 {
            continue;
        }
        let mut scope = vec![local[v]];
        scope.extend(nb);
        events.push(EventSpec {
            id: events.len(),
            scope,
            predicate: Predicate::Agreement { at_least },
        });
    }
    let variables = (0..nodes.len())
        .map(|id| VariableSpec {
            id,
            dist: Distribution::uniform_padded(buckets),
        })
        .collect();
    LLLInstance::new(variables, events)
}

pub fn edge_conjunction(g: &Graph, domain: u64, ctx: &SeedContext) -> Result<LLLInstance> {
    let mut rng = ctx.named("edge_conjunction").stream();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(i);
        incident[v].push(i);
    }
    let events = incident
        .into_iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .enumerate()
        .map(|(id, (_, scope))| EventSpec {
            id,
            predicate: Predicate::Conjunction {
                values: scope.iter().map(|_| rng.gen_range(0..domain)).collect(),
            },
            scope,
        })
        .collect();
    LLLInstance::new(uniform_vars(edges.len(), domain), events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Criterion;

    #[test]
    fn families_satisfy_the_polynomial_criterion() {
        let ctx = SeedContext::new(5);
        for spec in [
            InstanceSpec::conjunction_chain(),
            InstanceSpec::sparse_conjunction(),
            InstanceSpec::bucketing(),
        ] {
            let inst = generate_instance(&spec, 100, &ctx).unwrap();
            assert_eq!(inst.num_events(), 100);
            assert!(inst.check(Criterion::Poly(32)), "{spec:?} p={} d={}", inst.p(), inst.d());
        }
    }

    #[test]
    fn sparse_conjunction_shape() {
        let inst = sparse_conjunction(40, 1 << 16, 10, &SeedContext::new(1)).unwrap();
        assert_eq!(inst.num_vars(), 200);
        for v in 0..inst.num_vars() {
            assert_eq!(inst.events_of(v).len(), 2);
        }
        for e in inst.events() {
            let mut s = e.scope.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 10);
        }
    }

    #[test]
    fn edge_conjunction_dependency_is_the_graph() {
        let g = random_regular(50, 4, &SeedContext::new(2)).unwrap();
        let inst = edge_conjunction(&g, 2, &SeedContext::new(2)).unwrap();
        assert_eq!(inst.dependency_graph(), &g);
    }
}
