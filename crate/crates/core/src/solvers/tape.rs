use crate::model::Distribution;
use crate::runtime::SeedContext;

/// Source of variable values. The `k`-th draw of a variable is a function
/// of the variable and `k` only, so runs replay exactly.
pub trait Tape {
    fn draw(&mut self, var: usize, dist: &Distribution) -> u64;
}

pub struct SeededTape {
    ctx: SeedContext,
    counters: Vec<u64>,
}

impl SeededTape {
    pub fn new(ctx: SeedContext, num_vars: usize) -> Self {
        SeededTape {
            ctx,
            counters: vec![0; num_vars],
        }
    }
}

impl Tape for SeededTape {
    fn draw(&mut self, var: usize, dist: &Distribution) -> u64 {
        let k = self.counters[var];
        self.counters[var] += 1;
        dist.sample(&mut self.ctx.node_stream(var as u64, k))
    }
}

/// Always proposes the same value (or the largest in-support value below
/// it). Useful for tracing worst-case tapes by hand.
pub struct ConstTape(pub u64);

impl Tape for ConstTape {
    fn draw(&mut self, _var: usize, dist: &Distribution) -> u64 {
        match dist {
            _ if dist.in_support(self.0) => self.0,
            Distribution::Uniform { domain } => self.0.min(domain - 1),
            Distribution::Weights(_) => dist.support().take_while(|&x| x <= self.0).last().unwrap_or(0),
        }
    }
}
