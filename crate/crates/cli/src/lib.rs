//! Experiment runner behind the `local-lll` binary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use local_lll::colorings::{defective_coloring, frugal_coloring, list_coloring, verify_coloring, VerifyMode};
use local_lll::decomp::{ball_carve, validate_decomposition};
use local_lll::generators::{generate_graph, GraphSpec};
use local_lll::instances::{generate_instance, InstanceSpec};
use local_lll::solvers::{base_lll, bootstrap_lll, moser_tardos, BootstrapConfig, MtConfig, SolverOutcome};
use local_lll::{Graph, LLLInstance, RoundLedger, SeedContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "alg", rename_all = "snake_case")]
pub enum Algorithm {
    Mt,
    Base {
        lambda: usize,
    },
    Bootstrap {
        lambda: usize,
        /// Defaults to `⌈log₂ n⌉`.
        #[serde(default)]
        n_star: Option<usize>,
    },
    Decompose {
        lambda: usize,
    },
    Defective {
        f: usize,
    },
    Frugal {
        beta: usize,
    },
    /// Random lists of `len` colors out of `0..palette`.
    List {
        len: usize,
        palette: usize,
        c: f64,
    },
}

impl Algorithm {
    fn solves_instances(&self) -> bool {
        matches!(self, Algorithm::Mt | Algorithm::Base { .. } | Algorithm::Bootstrap { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Graph family for decomposition and coloring runs.
    #[serde(default = "default_generator")]
    pub generator: GraphSpec,
    /// Instance family for solver runs.
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_generator() -> GraphSpec {
    GraphSpec::Cycle
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if let Some(n) = self.sizes.iter().find(|&&n| n == 0) {
            bail!("sizes must be positive, got {n}");
        }
        match self.generator {
            GraphSpec::RandomRegular { d: 0 } => bail!("random_regular needs d >= 1"),
            GraphSpec::GnpCapped { p, .. } if !(0.0..=1.0).contains(&p) => bail!("gnp_capped needs p in [0, 1], got {p}"),
            _ => {}
        }
        if self.algorithm.solves_instances() && self.instance.is_none() {
            bail!("solver runs need an instance family");
        }
        match self.algorithm {
            Algorithm::Base { lambda } | Algorithm::Bootstrap { lambda, .. } | Algorithm::Decompose { lambda }
                if lambda == 0 =>
            {
                bail!("lambda must be at least 1")
            }
            Algorithm::Frugal { beta: 0 } => bail!("beta must be at least 1"),
            Algorithm::List { len, palette, c } if len == 0 || palette < len || c <= 0.0 => {
                bail!("list runs need 1 <= len <= palette and c > 0")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub seed: u64,
    pub verified: bool,
    pub ledger_total: u64,
    pub color_count: Option<usize>,
    pub cap: Option<f64>,
    /// Why the run produced nothing to verify.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub runs: usize,
    pub verified: usize,
    pub mean_ledger_total: f64,
    pub max_ledger_total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub passed: bool,
    pub rows: Vec<Row>,
    pub aggregate: Vec<Aggregate>,
}

/// Runs every (n, seed) pair. Rows come back sorted by `(n, seed)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    cfg.validate()?;
    let mut jobs: Vec<(usize, u64)> =
        cfg.sizes.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect();
    jobs.sort_unstable();
    let rows: Vec<Row> = jobs.par_iter().map(|&(n, seed)| run_one(cfg, n, seed)).collect();
    let mut by_n: BTreeMap<usize, Vec<&Row>> = BTreeMap::new();
    for r in &rows {
        by_n.entry(r.n).or_default().push(r);
    }
    let aggregate = by_n
        .into_iter()
        .map(|(n, rs)| Aggregate {
            n,
            runs: rs.len(),
            verified: rs.iter().filter(|r| r.verified).count(),
            mean_ledger_total: rs.iter().map(|r| r.ledger_total as f64).sum::<f64>() / rs.len() as f64,
            max_ledger_total: rs.iter().map(|r| r.ledger_total).max().unwrap_or(0),
        })
        .collect();
    Ok(Report {
        config: cfg.clone(),
        passed: rows.iter().all(|r| r.verified),
        rows,
        aggregate,
    })
}

fn run_one(cfg: &ExperimentConfig, n: usize, seed: u64) -> Row {
    let mut row = Row {
        n,
        seed,
        verified: false,
        ledger_total: 0,
        color_count: None,
        cap: None,
        error: None,
    };
    if let Err(e) = fill_row(cfg, n, seed, &mut row) {
        row.verified = false;
        row.error = Some(format!("{e:#}"));
    }
    row
}

fn fill_row(cfg: &ExperimentConfig, n: usize, seed: u64, row: &mut Row) -> anyhow::Result<()> {
    let ctx = SeedContext::new(seed);
    if cfg.algorithm.solves_instances() {
        let spec = cfg.instance.as_ref().context("missing instance family")?;
        let inst = generate_instance(spec, n, &ctx.named("instance"))?;
        let out = solve(&inst, &cfg.algorithm, &ctx.named("solve"))?;
        row.ledger_total = out.ledger.total();
        row.verified = inst.violated_events(&out.assignment)?.is_empty();
        return Ok(());
    }
    let g = generate_graph(&cfg.generator, n, &ctx.named("graph"))?;
    let mut ledger = RoundLedger::new();
    let run = ctx.named("run");
    let (result, mode) = match cfg.algorithm {
        Algorithm::Decompose { lambda } => {
            let nd = ball_carve(&g, lambda)?;
            row.verified = validate_decomposition(&g, &nd).passed;
            row.color_count = Some(nd.blocks.len());
            return Ok(());
        }
        Algorithm::Defective { f } => (defective_coloring(&g, f, &run, &mut ledger)?, VerifyMode::Defective { f }),
        Algorithm::Frugal { beta } => (frugal_coloring(&g, beta, &run, &mut ledger)?, VerifyMode::Frugal { beta }),
        Algorithm::List { len, palette, c } => {
            let lists = random_lists(&g, len, palette, &ctx.named("lists"));
            (list_coloring(&g, &lists, c, &run, &mut ledger)?, VerifyMode::List { lists })
        }
        _ => unreachable!("solver algorithms handled above"),
    };
    let report = verify_coloring(&g, &result, &mode);
    row.verified = report.passed;
    row.ledger_total = result.ledger.total();
    row.color_count = Some(report.color_count);
    row.cap = Some(report.cap);
    Ok(())
}

pub fn solve(inst: &LLLInstance, alg: &Algorithm, ctx: &SeedContext) -> anyhow::Result<SolverOutcome> {
    let mut ledger = RoundLedger::new();
    let out = match *alg {
        Algorithm::Mt => moser_tardos(inst, ctx, &MtConfig::default())?,
        Algorithm::Base { lambda } => base_lll(inst, lambda, ctx, &mut ledger)?,
        Algorithm::Bootstrap { lambda, n_star } => {
            let n_star = n_star.unwrap_or_else(|| (inst.num_events().max(2) as f64).log2().ceil() as usize);
            bootstrap_lll(inst, n_star.max(2), lambda, ctx, &mut ledger, &BootstrapConfig::default())?
        }
        _ => bail!("{alg:?} is not a solver"),
    };
    Ok(out)
}

pub fn random_lists(g: &Graph, len: usize, palette: usize, ctx: &SeedContext) -> Vec<Vec<usize>> {
    use rand::seq::index::sample;
    let mut rng = ctx.stream();
    (0..g.n())
        .map(|_| {
            let mut l = sample(&mut rng, palette, len).into_vec();
            l.sort_unstable();
            l
        })
        .collect()
}

/// One line per run, header included.
pub fn report_csv(report: &Report) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "seed", "verified", "ledger_total", "color_count", "cap", "error"])?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            r.seed.to_string(),
            r.verified.to_string(),
            r.ledger_total.to_string(),
            r.color_count.map(|c| c.to_string()).unwrap_or_default(),
            r.cap.map(|c| c.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alg: Algorithm) -> ExperimentConfig {
        ExperimentConfig {
            generator: GraphSpec::Cycle,
            instance: Some(InstanceSpec::conjunction_chain()),
            sizes: vec![20, 40],
            seeds: vec![3, 1],
            algorithm: alg,
            out: None,
        }
    }

    #[test]
    fn rows_are_sorted() {
        let r = run_experiment(&cfg(Algorithm::Defective { f: 1 })).unwrap();
        let keys: Vec<_> = r.rows.iter().map(|r| (r.n, r.seed)).collect();
        assert_eq!(keys, vec![(20, 1), (20, 3), (40, 1), (40, 3)]);
        assert!(r.passed);
        assert_eq!(r.aggregate.len(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = cfg(Algorithm::Mt);
        c.sizes = vec![0];
        assert!(c.validate().is_err());
        let mut c = cfg(Algorithm::Mt);
        c.instance = None;
        assert!(c.validate().is_err());
        assert!(cfg(Algorithm::Frugal { beta: 0 }).validate().is_err());
    }
}
