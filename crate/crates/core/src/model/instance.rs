use serde::{Deserialize, Serialize};

use super::assignment::PartialAssignment;
use super::distribution::Distribution;
use super::predicate::{Predicate, Slot};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_ENUM_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct VariableSpec {
    pub id: usize,
    pub dist: Distribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub id: usize,
    pub scope: Vec<usize>,
    pub predicate: Predicate,
}

#[derive(Serialize, Deserialize)]
struct VariableRecord {
    id: usize,
    domain: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    variables: Vec<VariableRecord>,
    events: Vec<EventSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `e·p·d <= 1`
    Epd,
    /// `p·(e·d)^λ < 1`
    Poly(u32),
}

/// `d` is replaced by `max(d, 1)`.
pub fn check_criterion(p: f64, d: usize, form: Criterion) -> bool {
    let d = d.max(1) as f64;
    let e = std::f64::consts::E;
    match form {
        Criterion::Epd => e * p * d <= 1.0,
        Criterion::Poly(l) => p * (e * d).powi(l as i32) < 1.0,
    }
}

/// Variables, bad events and their dependency graph.
#[derive(Clone, Debug)]
pub struct LLLInstance {
    variables: Vec<VariableSpec>,
    events: Vec<EventSpec>,
    var_events: Vec<Vec<usize>>,
    dep: Graph,
    probs: Vec<f64>,
    p: f64,
    enum_cap: u64,
}

impl LLLInstance {
    /// Ids must be dense and equal to list positions.
    pub fn new(variables: Vec<VariableSpec>, mut events: Vec<EventSpec>) -> Result<Self> {
        for (i, v) in variables.iter().enumerate() {
            if v.id != i {
                return Err(Error::param(format!("variable at position {i} has id {}", v.id)));
            }
            v.dist.validate()?;
        }
        let nv = variables.len();
        let mut var_events = vec![Vec::new(); nv];
        for (i, ev) in events.iter_mut().enumerate() {
            if ev.id != i {
                return Err(Error::param(format!("event at position {i} has id {}", ev.id)));
            }
            if ev.scope.is_empty() {
                return Err(Error::param(format!("event {i} has an empty scope")));
            }
            let mut sorted = ev.scope.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("event {i} has a repeated scope variable")));
            }
            if sorted.last().is_some_and(|&v| v >= nv) {
                return Err(Error::param(format!("event {i} refers to an unknown variable")));
            }
            ev.predicate.normalize(ev.scope.len())?;
            for &v in &ev.scope {
                var_events[v].push(i);
            }
        }
        let dep = dependency_graph_of(events.len(), &var_events);
        let mut inst = LLLInstance {
            variables,
            events,
            var_events,
            dep,
            probs: Vec::new(),
            p: 0.0,
            enum_cap: DEFAULT_ENUM_CAP,
        };
        let empty = PartialAssignment::new(nv);
        let probs = (0..inst.events.len())
            .map(|e| inst.cond_prob(e, &empty))
            .collect::<Result<Vec<_>>>()?;
        inst.p = probs.iter().copied().fold(0.0, f64::max);
        inst.probs = probs;
        Ok(inst)
    }

    pub fn with_enum_cap(mut self, cap: u64) -> Self {
        self.enum_cap = cap;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn variable(&self, v: usize) -> &VariableSpec {
        &self.variables[v]
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn event(&self, e: usize) -> &EventSpec {
        &self.events[e]
    }

    pub fn events(&self) -> &[EventSpec] {
        &self.events
    }

    /// Events whose scope contains `v`, ascending.
    pub fn events_of(&self, v: usize) -> &[usize] {
        &self.var_events[v]
    }

    pub fn dependency_graph(&self) -> &Graph {
        &self.dep
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.dep.max_degree()
    }

    pub fn event_prob(&self, e: usize) -> f64 {
        self.probs[e]
    }

    pub fn check(&self, form: Criterion) -> bool {
        check_criterion(self.p, self.d(), form)
    }

    fn slots<'a>(&'a self, e: usize, pa: &PartialAssignment) -> Vec<Slot<'a>> {
        self.events[e]
            .scope
            .iter()
            .map(|&v| Slot {
                value: pa.get(v),
                dist: &self.variables[v].dist,
            })
            .collect()
    }

    /// Exact `Pr[event e | values fixed in pa]`.
    pub fn cond_prob(&self, e: usize, pa: &PartialAssignment) -> Result<f64> {
        let slots = self.slots(e, pa);
        match self.events[e].predicate.closed_form(&slots) {
            Some(p) => Ok(p),
            None => self.enumerate(e, &slots),
        }
    }

    /// `cond_prob` by brute-force enumeration of the unset scope.
    pub fn cond_prob_enumerated(&self, e: usize, pa: &PartialAssignment) -> Result<f64> {
        let slots = self.slots(e, pa);
        self.enumerate(e, &slots)
    }

    fn enumerate(&self, e: usize, slots: &[Slot]) -> Result<f64> {
        let mut count: u128 = 1;
        for s in slots.iter().filter(|s| s.value.is_none()) {
            count = count.saturating_mul(s.dist.support_len() as u128);
        }
        if count > self.enum_cap as u128 {
            return Err(Error::Capacity {
                what: "conditional probability enumeration",
                cap: self.enum_cap,
            });
        }
        let free: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].value.is_none()).collect();
        let supports: Vec<Vec<u64>> = free.iter().map(|&i| slots[i].dist.support().collect()).collect();
        let mut vals: Vec<u64> = slots.iter().map(|s| s.value.unwrap_or(0)).collect();
        let mut idx = vec![0usize; free.len()];
        let pred = &self.events[e].predicate;
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for (k, &i) in free.iter().enumerate() {
                vals[i] = supports[k][idx[k]];
                w *= slots[i].dist.prob(vals[i]);
            }
            if pred.eval(&vals) {
                total += w;
            }
            // odometer, last position fastest
            let mut k = free.len();
            loop {
                if k == 0 {
                    return Ok(total.clamp(0.0, 1.0));
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < supports[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Whether event `e` can still be avoided by completing `pa`.
    pub fn can_be_false(&self, e: usize, pa: &PartialAssignment) -> Result<bool> {
        let slots = self.slots(e, pa);
        match self.events[e].predicate.can_be_false(&slots) {
            Some(b) => Ok(b),
            None => Ok(self.cond_prob(e, pa)? < 1.0 - 1e-12),
        }
    }

    pub fn eval_event(&self, e: usize, values: &[u64]) -> bool {
        let vals: Vec<u64> = self.events[e].scope.iter().map(|&v| values[v]).collect();
        self.events[e].predicate.eval(&vals)
    }

    /// Events that occur under a complete assignment, ascending.
    pub fn violated_events(&self, pa: &PartialAssignment) -> Result<Vec<usize>> {
        let values = pa.complete_values()?;
        Ok(self.violated_under(&values))
    }

    pub fn violated_under(&self, values: &[u64]) -> Vec<usize> {
        (0..self.events.len())
            .filter(|&e| self.eval_event(e, values))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = InstanceRecord {
            variables: self
                .variables
                .iter()
                .map(|v| VariableRecord {
                    id: v.id,
                    domain: v.dist.domain(),
                    dist: match &v.dist {
                        Distribution::Uniform { .. } => None,
                        Distribution::Weights(w) => Some(w.clone()),
                    },
                })
                .collect(),
            events: self.events.clone(),
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: InstanceRecord = serde_json::from_str(text)?;
        let variables = rec
            .variables
            .into_iter()
            .map(|r| {
                let dist = match r.dist {
                    None => Distribution::uniform(r.domain),
                    Some(w) => {
                        if w.len() as u64 != r.domain {
                            return Err(Error::param(format!(
                                "variable {} has {} weights for domain {}",
                                r.id,
                                w.len(),
                                r.domain
                            )));
                        }
                        Distribution::Weights(w)
                    }
                };
                Ok(VariableSpec { id: r.id, dist })
            })
            .collect::<Result<Vec<_>>>()?;
        LLLInstance::new(variables, rec.events)
    }
}

fn dependency_graph_of(num_events: usize, var_events: &[Vec<usize>]) -> Graph {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_events];
    for evs in var_events {
        for &a in evs {
            for &b in evs {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    Graph::from_sorted_adjacency(adj)
}

/// Rebuilds the dependency graph from scopes by pairwise intersection.
pub fn dependency_graph(inst: &LLLInstance) -> Graph {
    inst.dependency_graph().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(n: usize) -> Vec<VariableSpec> {
        (0..n)
            .map(|id| VariableSpec {
                id,
                dist: Distribution::bits(),
            })
            .collect()
    }

    fn conj(id: usize, scope: Vec<usize>) -> EventSpec {
        let k = scope.len();
        EventSpec {
            id,
            scope,
            predicate: Predicate::Conjunction { values: vec![1; k] },
        }
    }

    #[test]
    fn dependency_examples() {
        let i = LLLInstance::new(bits(4), vec![conj(0, vec![0, 1]), conj(1, vec![2, 3])]).unwrap();
        assert_eq!(i.dependency_graph().m(), 0);
        let i = LLLInstance::new(bits(3), vec![conj(0, vec![0, 1]), conj(1, vec![1, 2])]).unwrap();
        assert_eq!(i.dependency_graph().edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let star: Vec<_> = (0..5).map(|e| conj(e, vec![0, e + 1])).collect();
        let i = LLLInstance::new(bits(6), star).unwrap();
        assert_eq!((i.dependency_graph().m(), i.d()), (10, 4));
        assert!((i.p() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn criterion_examples() {
        assert!(check_criterion(0.25, 1, Criterion::Epd));
        assert!(!check_criterion(0.5, 1, Criterion::Epd));
        assert!(check_criterion(2f64.powi(-20), 2, Criterion::Poly(4)));
        assert!(!check_criterion(0.5, 0, Criterion::Epd));
    }

    #[test]
    fn cond_prob_examples() {
        let i = LLLInstance::new(bits(4), vec![conj(0, vec![0, 1]), conj(1, vec![0, 1, 2, 3])]).unwrap();
        let mut pa = PartialAssignment::new(4);
        pa.set(0, 1).unwrap();
        assert_eq!(i.cond_prob(0, &pa).unwrap(), 0.5);
        pa.set(1, 1).unwrap();
        assert_eq!(i.cond_prob(1, &pa).unwrap(), 0.25);
        let odd: Vec<Vec<u64>> = (0..8u64)
            .filter(|x| x.count_ones() % 2 == 1)
            .map(|x| vec![x >> 2 & 1, x >> 1 & 1, x & 1])
            .collect();
        let parity = EventSpec {
            id: 0,
            scope: vec![0, 1, 2],
            predicate: Predicate::Table { accepted: odd },
        };
        let i = LLLInstance::new(bits(3), vec![parity]).unwrap();
        let empty = PartialAssignment::new(3);
        assert_eq!(i.cond_prob(0, &empty).unwrap(), 0.5);
        assert_eq!(i.cond_prob_enumerated(0, &empty).unwrap(), 0.5);
    }

    #[test]
    fn enumeration_cap() {
        let vars = vec![
            VariableSpec { id: 0, dist: Distribution::uniform(1 << 11) },
            VariableSpec { id: 1, dist: Distribution::uniform(1 << 11) },
        ];
        let i = LLLInstance::new(vars, vec![conj(0, vec![0, 1])]).unwrap();
        let pa = PartialAssignment::new(2);
        assert!(matches!(i.cond_prob_enumerated(0, &pa), Err(Error::Capacity { .. })));
        assert!(i.cond_prob(0, &pa).is_ok());
    }

    #[test]
    fn violated_examples() {
        let i = LLLInstance::new(bits(3), vec![conj(0, vec![0, 1]), conj(1, vec![1, 2])]).unwrap();
        let pa = PartialAssignment::from_values(vec![1, 0, 1]);
        assert!(i.violated_events(&pa).unwrap().is_empty());
        let pa = PartialAssignment::from_values(vec![1, 1, 0]);
        assert_eq!(i.violated_events(&pa).unwrap(), vec![0]);
        assert!(matches!(
            i.violated_events(&PartialAssignment::new(3)),
            Err(Error::IncompleteAssignment(0))
        ));
    }

    #[test]
    fn json_round_trip() {
        let mut vars = bits(3);
        vars[2].dist = Distribution::Weights(vec![0.25, 0.75]);
        let i = LLLInstance::new(vars, vec![conj(0, vec![0, 1]), conj(1, vec![1, 2])]).unwrap();
        let j = LLLInstance::from_json(&i.to_json().unwrap()).unwrap();
        assert_eq!(i.events(), j.events());
        assert_eq!(i.variables(), j.variables());
        assert!(LLLInstance::from_json(r#"{"variables":[{"id":0,"domain":2}],"events":[{"id":0,"scope":[],"predicate":{"kind":"agreement","params":{"at_least":1}}}]}"#).is_err());
    }
}
