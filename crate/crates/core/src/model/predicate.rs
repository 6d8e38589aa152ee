//! Event predicates over an ordered scope, with exact conditional
//! probability oracles.

use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtLeast(usize),
    AtMost(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Predicate {
    /// True iff position `i` takes `values[i]` for every `i`.
    Conjunction { values: Vec<u64> },
    /// True iff every `(pos, value)` in `require` holds and the number of
    /// positions `i` whose value lies in `hits[i]` satisfies `bound`.
    Threshold {
        hits: Vec<Vec<u64>>,
        bound: Bound,
        #[serde(default)]
        require: Vec<(usize, u64)>,
    },
    /// True iff at least `at_least` positions `i >= 1` equal position 0.
    Agreement { at_least: usize },
    /// True iff some value occurs at least `at_least` times.
    Multiplicity { at_least: usize },
    /// True iff the scope tuple is one of `accepted`.
    Table { accepted: Vec<Vec<u64>> },
}

/// One scope position as seen by an oracle.
#[derive(Clone, Copy, Debug)]
pub struct Slot<'a> {
    pub value: Option<u64>,
    pub dist: &'a Distribution,
}

impl Predicate {
    pub fn kind(&self) -> &'static str {
        match self {
            Predicate::Conjunction { .. } => "conjunction",
            Predicate::Threshold { .. } => "threshold",
            Predicate::Agreement { .. } => "agreement",
            Predicate::Multiplicity { .. } => "multiplicity",
            Predicate::Table { .. } => "table",
        }
    }

    /// Checks arity and puts parameter lists in canonical (sorted) form.
    pub fn normalize(&mut self, arity: usize) -> Result<()> {
        match self {
            Predicate::Conjunction { values } => {
                if values.len() != arity {
                    return Err(Error::param("conjunction needs one value per scope position"));
                }
            }
            Predicate::Threshold { hits, require, .. } => {
                if hits.len() != arity {
                    return Err(Error::param("threshold needs one hit list per scope position"));
                }
                for h in hits.iter_mut() {
                    h.sort_unstable();
                    h.dedup();
                }
                if require.iter().any(|&(p, _)| p >= arity) {
                    return Err(Error::param("threshold requirement outside scope"));
                }
                require.sort_unstable();
                require.dedup();
            }
            Predicate::Agreement { .. } => {
                if arity < 2 {
                    return Err(Error::param("agreement needs at least two positions"));
                }
            }
            Predicate::Multiplicity { .. } => {}
            Predicate::Table { accepted } => {
                if accepted.iter().any(|t| t.len() != arity) {
                    return Err(Error::param("table tuple length differs from scope"));
                }
                accepted.sort_unstable();
                accepted.dedup();
            }
        }
        Ok(())
    }

    pub fn eval(&self, vals: &[u64]) -> bool {
        match self {
            Predicate::Conjunction { values } => vals == values.as_slice(),
            Predicate::Threshold {
                hits,
                bound,
                require,
            } => {
                require.iter().all(|&(p, r)| vals[p] == r) && {
                    let c = vals
                        .iter()
                        .zip(hits)
                        .filter(|(x, h)| h.binary_search(x).is_ok())
                        .count();
                    bound_holds(*bound, c)
                }
            }
            Predicate::Agreement { at_least } => {
                vals[1..].iter().filter(|&&x| x == vals[0]).count() >= *at_least
            }
            Predicate::Multiplicity { at_least } => {
                if *at_least == 0 {
                    return true;
                }
                let mut v = vals.to_vec();
                v.sort_unstable();
                let mut run = 0;
                let mut best = 0;
                for i in 0..v.len() {
                    run = if i > 0 && v[i] == v[i - 1] { run + 1 } else { 1 };
                    best = best.max(run);
                }
                best >= *at_least
            }
            Predicate::Table { accepted } => accepted.binary_search_by(|t| t.as_slice().cmp(vals)).is_ok(),
        }
    }

    /// Exact probability that the predicate holds when unset slots are drawn
    /// independently from their distributions. `None` when no closed form
    /// applies and the caller must enumerate.
    pub fn closed_form(&self, slots: &[Slot]) -> Option<f64> {
        let p = match self {
            Predicate::Conjunction { values } => slots
                .iter()
                .zip(values)
                .map(|(s, &v)| match s.value {
                    Some(x) => (x == v) as u8 as f64,
                    None => s.dist.prob(v),
                })
                .product(),
            Predicate::Threshold {
                hits,
                bound,
                require,
            } => threshold_prob(slots, hits, *bound, require),
            Predicate::Agreement { at_least } => agreement_prob(slots, *at_least)?,
            Predicate::Multiplicity { at_least } => multiplicity_prob(slots, *at_least)?,
            Predicate::Table { accepted } => accepted
                .iter()
                .map(|t| {
                    slots
                        .iter()
                        .zip(t)
                        .map(|(s, &v)| match s.value {
                            Some(x) => (x == v) as u8 as f64,
                            None => s.dist.prob(v),
                        })
                        .product::<f64>()
                })
                .sum(),
        };
        Some(p.clamp(0.0, 1.0))
    }

    /// Whether some positive-probability completion makes the predicate
    /// false. Exact for every kind except multiplicity over unlike
    /// distributions, where `None` is returned.
    pub fn can_be_false(&self, slots: &[Slot]) -> Option<bool> {
        let can_differ = |s: &Slot, v: u64| match s.value {
            Some(x) => x != v,
            None => s.dist.support_len() > 1 || !s.dist.in_support(v),
        };
        match self {
            Predicate::Conjunction { values } => {
                Some(slots.iter().zip(values).any(|(s, &v)| can_differ(s, v)))
            }
            Predicate::Threshold {
                hits,
                bound,
                require,
            } => {
                let mut forced: Vec<Option<u64>> = slots.iter().map(|s| s.value).collect();
                for &(p, r) in require {
                    if can_differ(&slots[p], r) {
                        return Some(true);
                    }
                    forced[p] = Some(r);
                }
                let (mut lo, mut hi) = (0usize, 0usize);
                for ((s, f), h) in slots.iter().zip(&forced).zip(hits) {
                    match f {
                        Some(x) => {
                            let hit = h.binary_search(x).is_ok() as usize;
                            lo += hit;
                            hi += hit;
                        }
                        None => {
                            let in_sup = h.iter().filter(|&&x| s.dist.in_support(x)).count() as u64;
                            if in_sup == s.dist.support_len() {
                                lo += 1;
                            }
                            if in_sup > 0 {
                                hi += 1;
                            }
                        }
                    }
                }
                Some(match *bound {
                    Bound::AtLeast(t) => lo < t,
                    Bound::AtMost(t) => hi > t,
                })
            }
            Predicate::Agreement { at_least } => Some(agreement_can_fail(slots, *at_least)),
            Predicate::Multiplicity { at_least } => multiplicity_can_fail(slots, *at_least),
            Predicate::Table { accepted } => {
                let mut total: u128 = 1;
                for s in slots.iter().filter(|s| s.value.is_none()) {
                    total = total.saturating_mul(s.dist.support_len() as u128);
                }
                let consistent = accepted
                    .iter()
                    .filter(|t| {
                        slots.iter().zip(t.iter()).all(|(s, &v)| match s.value {
                            Some(x) => x == v,
                            None => s.dist.in_support(v),
                        })
                    })
                    .count() as u128;
                Some(total > consistent)
            }
        }
    }
}

fn bound_holds(b: Bound, c: usize) -> bool {
    match b {
        Bound::AtLeast(t) => c >= t,
        Bound::AtMost(t) => c <= t,
    }
}

/// Distribution of the number of successes among independent trials.
pub fn poisson_binomial(qs: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; qs.len() + 1];
    pmf[0] = 1.0;
    for (i, &q) in qs.iter().enumerate() {
        for k in (0..=i + 1).rev() {
            let stay = pmf[k] * (1.0 - q);
            let up = if k > 0 { pmf[k - 1] * q } else { 0.0 };
            pmf[k] = stay + up;
        }
    }
    pmf
}

/// `Pr[base + X` satisfies `bound]` for `X` Poisson-binomial over `qs`.
pub fn pb_bound_prob(base: usize, qs: &[f64], bound: Bound) -> f64 {
    match bound {
        Bound::AtLeast(t) => {
            if base >= t {
                return 1.0;
            }
            let need = t - base;
            if need > qs.len() {
                return 0.0;
            }
            poisson_binomial(qs)[need..].iter().sum()
        }
        Bound::AtMost(t) => {
            if base > t {
                return 0.0;
            }
            let room = t - base;
            if room >= qs.len() {
                return 1.0;
            }
            poisson_binomial(qs)[..=room].iter().sum()
        }
    }
}

fn threshold_prob(slots: &[Slot], hits: &[Vec<u64>], bound: Bound, require: &[(usize, u64)]) -> f64 {
    let mut forced: Vec<Option<u64>> = slots.iter().map(|s| s.value).collect();
    let mut factor = 1.0;
    for (i, &(p, r)) in require.iter().enumerate() {
        if i > 0 && require[i - 1].0 == p {
            // two different required values at one position
            return 0.0;
        }
        match slots[p].value {
            Some(x) if x != r => return 0.0,
            Some(_) => {}
            None => factor *= slots[p].dist.prob(r),
        }
        forced[p] = Some(r);
    }
    if factor == 0.0 {
        return 0.0;
    }
    let mut base = 0;
    let mut qs = Vec::new();
    for ((s, f), h) in slots.iter().zip(&forced).zip(hits) {
        match f {
            Some(x) => base += h.binary_search(x).is_ok() as usize,
            None => qs.push(h.iter().map(|&x| s.dist.prob(x)).sum::<f64>().min(1.0)),
        }
    }
    factor * pb_bound_prob(base, &qs, bound)
}

/// Success probabilities of the non-pivot positions for pivot value `a`.
fn agreement_qs(rest: &[Slot], a: u64, base: &mut usize, qs: &mut Vec<f64>) {
    *base = 0;
    qs.clear();
    for s in rest {
        match s.value {
            Some(x) => *base += (x == a) as usize,
            None => qs.push(s.dist.prob(a)),
        }
    }
}

fn agreement_prob(slots: &[Slot], t: usize) -> Option<f64> {
    let (pivot, rest) = slots.split_first()?;
    let mut base = 0;
    let mut qs = Vec::new();
    let tail = |a: u64, base: &mut usize, qs: &mut Vec<f64>| {
        agreement_qs(rest, a, base, qs);
        pb_bound_prob(*base, qs, Bound::AtLeast(t))
    };
    if let Some(a) = pivot.value {
        return Some(tail(a, &mut base, &mut qs));
    }
    match pivot.dist {
        Distribution::Weights(w) => Some(
            w.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| p * tail(a as u64, &mut base, &mut qs))
                .sum(),
        ),
        Distribution::Uniform { domain } => {
            let domain = *domain;
            // Values that are neither set elsewhere nor in a weighted support
            // behave alike within each interval between uniform domain sizes.
            let mut special: Vec<u64> = Vec::new();
            let mut cuts: Vec<u64> = vec![0, domain];
            for s in rest {
                match (s.value, s.dist) {
                    (Some(x), _) => special.push(x),
                    (None, Distribution::Weights(_)) => special.extend(s.dist.support()),
                    (None, Distribution::Uniform { domain: k }) => cuts.push((*k).min(domain)),
                }
            }
            special.retain(|&x| x < domain);
            special.sort_unstable();
            special.dedup();
            cuts.sort_unstable();
            cuts.dedup();
            let w = 1.0 / domain as f64;
            let mut total = 0.0;
            for &a in &special {
                total += w * tail(a, &mut base, &mut qs);
            }
            for c in cuts.windows(2) {
                let (lo, hi) = (c[0], c[1]);
                let inside = special.iter().filter(|&&x| x >= lo && x < hi).count() as u64;
                let generic = hi - lo - inside;
                if generic == 0 {
                    continue;
                }
                // any representative value works: pick one not in `special`
                let rep = (lo..hi).find(|x| special.binary_search(x).is_err())?;
                total += generic as f64 * w * tail(rep, &mut base, &mut qs);
            }
            Some(total)
        }
    }
}

fn agreement_can_fail(slots: &[Slot], t: usize) -> bool {
    let (pivot, rest) = match slots.split_first() {
        Some(x) => x,
        None => return false,
    };
    // Agreements that are unavoidable once the pivot is `a`.
    let forced = |a: u64| {
        rest.iter()
            .filter(|s| match s.value {
                Some(x) => x == a,
                None => s.dist.support_len() == 1 && s.dist.in_support(a),
            })
            .count()
    };
    if let Some(a) = pivot.value {
        return forced(a) < t;
    }
    let mut special: Vec<u64> = rest
        .iter()
        .filter_map(|s| match s.value {
            Some(x) => Some(x),
            None if s.dist.support_len() == 1 => s.dist.support().next(),
            None => None,
        })
        .filter(|&x| pivot.dist.in_support(x))
        .collect();
    special.sort_unstable();
    special.dedup();
    if (special.len() as u64) < pivot.dist.support_len() {
        return t > 0;
    }
    special.iter().any(|&a| forced(a) < t)
}

fn multiplicity_can_fail(slots: &[Slot], t: usize) -> Option<bool> {
    if t == 0 {
        return Some(false);
    }
    let mut set: Vec<u64> = slots.iter().filter_map(|s| s.value).collect();
    set.sort_unstable();
    let mut counts: Vec<(u64, usize)> = Vec::new();
    for x in set {
        match counts.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => counts.push((x, 1)),
        }
    }
    if counts.iter().any(|&(_, c)| c >= t) {
        return Some(false);
    }
    let unset: Vec<&Slot> = slots.iter().filter(|s| s.value.is_none()).collect();
    let Some(first) = unset.first() else {
        return Some(true);
    };
    if unset.iter().any(|s| s.dist != first.dist) {
        return None;
    }
    // Identical supports: fill each support value up to t-1 occurrences.
    let taken: usize = counts
        .iter()
        .filter(|(x, _)| first.dist.in_support(*x))
        .map(|&(_, c)| c)
        .sum();
    let room = (first.dist.support_len() as u128) * (t as u128 - 1) - taken as u128;
    Some(room >= unset.len() as u128)
}

/// Polynomial product truncated to degree `deg`.
fn poly_mul(a: &[f64], b: &[f64], deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    for (i, &x) in a.iter().enumerate().take(deg + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(deg + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[f64], mut e: u64, deg: usize) -> Vec<f64> {
    let mut acc = vec![0.0; deg + 1];
    acc[0] = 1.0;
    let mut b = base.to_vec();
    b.resize(deg + 1, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(&acc, &b, deg);
        }
        e >>= 1;
        if e > 0 {
            b = poly_mul(&b, &b, deg);
        }
    }
    acc
}

/// `Σ_{j<=cap} (q x)^j / j!`, truncated to degree `deg`.
fn capped_exp(q: f64, cap: usize, deg: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(cap.min(deg) + 1);
    let mut term = 1.0;
    for j in 0..=cap.min(deg) {
        if j > 0 {
            term *= q / j as f64;
        }
        out.push(term);
    }
    out
}

/// `1 − Pr[every value occurs < t times]` via exponential generating
/// functions; needs identically distributed unset positions.
fn multiplicity_prob(slots: &[Slot], t: usize) -> Option<f64> {
    if t == 0 {
        return Some(1.0);
    }
    let mut set: Vec<u64> = slots.iter().filter_map(|s| s.value).collect();
    set.sort_unstable();
    let mut counts: Vec<(u64, usize)> = Vec::new();
    for x in set {
        match counts.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => counts.push((x, 1)),
        }
    }
    if counts.iter().any(|&(_, c)| c >= t) {
        return Some(1.0);
    }
    let unset: Vec<&Slot> = slots.iter().filter(|s| s.value.is_none()).collect();
    let m = unset.len();
    if m == 0 {
        return Some(0.0);
    }
    let dist = unset[0].dist;
    if unset.iter().any(|s| s.dist != dist) {
        return None;
    }
    let cap_of = |x: u64| {
        let c = counts
            .binary_search_by_key(&x, |&(y, _)| y)
            .map(|i| counts[i].1)
            .unwrap_or(0);
        t - 1 - c
    };
    let mut poly = vec![1.0];
    match dist {
        Distribution::Weights(w) => {
            for (x, &q) in w.iter().enumerate() {
                if q > 0.0 {
                    poly = poly_mul(&poly, &capped_exp(q, cap_of(x as u64), m), m);
                }
            }
        }
        Distribution::Uniform { domain } => {
            let q = 1.0 / *domain as f64;
            let mut specials = 0u64;
            for &(x, _) in counts.iter().filter(|(x, _)| x < domain) {
                specials += 1;
                poly = poly_mul(&poly, &capped_exp(q, cap_of(x), m), m);
            }
            let generic = capped_exp(q, t - 1, m);
            poly = poly_mul(&poly, &poly_pow(&generic, domain - specials, m), m);
        }
    }
    let mut fact = 1.0;
    for j in 1..=m {
        fact *= j as f64;
    }
    let ok = poly.get(m).copied().unwrap_or(0.0) * fact;
    Some(1.0 - ok.clamp(0.0, 1.0))
}
