use serde::{Deserialize, Serialize};

use super::tape::{SeededTape, Tape};
use super::{local_square, log_star, DANGER_TOL, POSTCHECK_TOL};
use crate::error::{Error, Result};
use crate::graph::greedy_coloring;
use crate::model::{Criterion, LLLInstance, PartialAssignment};
use crate::runtime::{RoundLedger, SeedContext};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RpsStats {
    pub colors: usize,
    pub frozen: usize,
    /// Active events left with an unset variable, ascending.
    pub unresolved: Vec<usize>,
    pub max_cond: f64,
    /// Events whose conditional probability already exceeded `√p` on entry;
    /// they are exempt from the exit check.
    pub exempt: usize,
}

/// Whether event `e` has reached the freezing threshold.
pub(crate) fn dangerous(cond: f64, sqrt_p: f64) -> bool {
    cond > 0.0 && cond >= sqrt_p * (1.0 - DANGER_TOL)
}

/// Samples the unset, unfrozen variables of all events, color class by color
/// class of a distance-2 coloring, freezing around any event that becomes
/// dangerous. Variables in no event are sampled directly.
pub fn random_partial_setting(
    inst: &LLLInstance,
    lambda: usize,
    ctx: &SeedContext,
    ledger: &mut RoundLedger,
) -> Result<PartialAssignment> {
    if lambda < 8 {
        log::warn!("random partial setting run with lambda = {lambda} < 8");
    }
    if !inst.check(Criterion::Poly(4 * lambda as u32)) {
        log::warn!("instance does not satisfy p(ed)^(4λ) < 1 for λ = {lambda}");
    }
    let mut pa = PartialAssignment::new(inst.num_vars());
    let mut tape = SeededTape::new(ctx.named("rps"), inst.num_vars());
    sample_free_variables(inst, &mut pa, &mut tape)?;
    let active: Vec<usize> = (0..inst.num_events()).collect();
    partial_setting(inst, &mut pa, &active, &mut tape, inst.num_events(), ledger)?;
    Ok(pa)
}

/// Sets every variable that appears in no event.
pub(crate) fn sample_free_variables(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    tape: &mut dyn Tape,
) -> Result<()> {
    for v in 0..inst.num_vars() {
        if inst.events_of(v).is_empty() && pa.get(v).is_none() {
            pa.set(v, tape.draw(v, &inst.variable(v).dist))?;
        }
    }
    Ok(())
}

/// Core of the partial setting over the `active` events (ascending ids);
/// already-set variables are kept.
pub fn partial_setting(
    inst: &LLLInstance,
    pa: &mut PartialAssignment,
    active: &[usize],
    tape: &mut dyn Tape,
    n_param: usize,
    ledger: &mut RoundLedger,
) -> Result<RpsStats> {
    let sqrt_p = inst.p().sqrt();
    let (sq, _) = local_square(inst, active);
    let color = greedy_coloring(&sq);
    // same-class events never share an event neighbourhood
    if sq.edges().any(|(a, b)| color[a] == color[b]) {
        return Err(Error::Invariant("distance-2 coloring is not proper".into()));
    }
    let colors = color.iter().copied().max().map_or(0, |c| c + 1);
    ledger.charge("rps/distance-2-coloring", log_star(n_param));

    let mut exempt = vec![false; active.len()];
    let mut n_exempt = 0;
    for (i, &e) in active.iter().enumerate() {
        if inst.cond_prob(e, pa)? > sqrt_p + POSTCHECK_TOL {
            exempt[i] = true;
            n_exempt += 1;
        }
    }

    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); colors];
    for (i, &c) in color.iter().enumerate() {
        classes[c].push(active[i]);
    }
    let mut frozen = 0;
    for (c, class) in classes.iter().enumerate() {
        for &e in class {
            for &v in &inst.event(e).scope {
                if pa.get(v).is_some() || pa.is_frozen(v) {
                    continue;
                }
                let x = tape.draw(v, &inst.variable(v).dist);
                pa.set(v, x)?;
                let mut hit = Vec::new();
                for &f in inst.events_of(v) {
                    if dangerous(inst.cond_prob(f, pa)?, sqrt_p) {
                        hit.push(f);
                    }
                }
                if !hit.is_empty() {
                    pa.unset(v);
                    frozen += pa.freeze(v) as usize;
                    for f in hit {
                        for &u in &inst.event(f).scope {
                            frozen += pa.freeze(u) as usize;
                        }
                    }
                }
            }
        }
        ledger.charge(format!("rps/class{c}"), 2);
    }
    if !pa.invariant_holds() {
        return Err(Error::Invariant("a frozen variable holds a value".into()));
    }

    let mut max_cond: f64 = 0.0;
    let mut unresolved = Vec::new();
    for (i, &e) in active.iter().enumerate() {
        let c = inst.cond_prob(e, pa)?;
        if !exempt[i] {
            max_cond = max_cond.max(c);
        }
        if inst.event(e).scope.iter().any(|&v| pa.get(v).is_none()) {
            unresolved.push(e);
        }
    }
    if max_cond > sqrt_p + POSTCHECK_TOL {
        return Err(Error::Invariant(format!(
            "partial setting left conditional probability {max_cond} above sqrt(p) = {sqrt_p}"
        )));
    }
    Ok(RpsStats {
        colors,
        frozen,
        unresolved,
        max_cond,
        exempt: n_exempt,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tape::ConstTape;
    use super::*;
    use crate::model::{Distribution, EventSpec, Predicate, VariableSpec};

    fn bits(n: usize) -> Vec<VariableSpec> {
        (0..n)
            .map(|id| VariableSpec {
                id,
                dist: Distribution::bits(),
            })
            .collect()
    }

    #[test]
    fn four_bit_conjunction_trace() {
        let ev = EventSpec {
            id: 0,
            scope: vec![0, 1, 2, 3],
            predicate: Predicate::Conjunction { values: vec![1; 4] },
        };
        let inst = LLLInstance::new(bits(4), vec![ev]).unwrap();
        let mut pa = PartialAssignment::new(4);
        let mut ledger = RoundLedger::new();
        let st = partial_setting(&inst, &mut pa, &[0], &mut ConstTape(1), 4, &mut ledger).unwrap();
        assert_eq!(pa.get(0), Some(1));
        assert_eq!(pa.get(1), None);
        assert!((1..4).all(|v| pa.is_frozen(v)));
        assert_eq!(st.frozen, 3);
        assert!(st.max_cond <= 0.25 + 1e-12);
    }

    #[test]
    fn false_predicates_set_everything() {
        let ev = EventSpec {
            id: 0,
            scope: vec![0, 1],
            predicate: Predicate::Table { accepted: vec![] },
        };
        let inst = LLLInstance::new(bits(3), vec![ev]).unwrap();
        let pa = random_partial_setting(&inst, 8, &SeedContext::new(3), &mut RoundLedger::new()).unwrap();
        assert!(pa.is_complete());
        assert_eq!(pa.frozen_count(), 0);
    }
}
