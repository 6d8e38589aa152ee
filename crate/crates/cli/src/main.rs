use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use local_lll::colorings::{
    defective_coloring, frugal_coloring, list_coloring, verify_coloring, ColoringResult, VerifyMode,
};
use local_lll::decomp::{ball_carve, validate_decomposition};
use local_lll::generators::{generate_graph, GraphSpec};
use local_lll::instances::{generate_instance, InstanceSpec};
use local_lll::{Graph, LLLInstance, PartialAssignment, RoundLedger, SeedContext};
use local_lll_cli::{random_lists, report_csv, run_experiment, solve, Algorithm, ExperimentConfig};

#[derive(Parser)]
#[command(name = "local-lll", version, about = "Distributed LLL algorithms and coloring pipelines in a simulated LOCAL model")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph or an LLL instance.
    Gen {
        #[command(subcommand)]
        what: GenWhat,
        #[command(flatten)]
        common: Common,
    },
    /// Ball-carving network decomposition, validated.
    Decompose {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        lambda: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Solve an LLL instance.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Alg::Base)]
        alg: Alg,
        #[arg(long, default_value_t = 8)]
        lambda: usize,
        /// Small-instance size for the bootstrapped solver (default ⌈log₂ n⌉).
        #[arg(long)]
        n_star: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a coloring pipeline and verify its output.
    Color {
        #[command(subcommand)]
        kind: ColorKind,
        #[command(flatten)]
        common: Common,
    },
    /// Check a coloring or an assignment read from files.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment over sizes and seeds.
    Bench {
        /// JSON experiment config; overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "100,1000")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Alg::Base)]
        alg: Alg,
        #[arg(long, value_enum, default_value_t = Family::Sparse)]
        family: Family,
        #[arg(long, default_value_t = 8)]
        lambda: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum GenWhat {
    Graph(GraphGen),
    Instance(InstanceGen),
}

#[derive(Args)]
struct GraphGen {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    delta_cap: usize,
}

#[derive(Args)]
struct InstanceGen {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct GraphArgs {
    /// Graph JSON written by `gen graph`.
    #[arg(long, conflicts_with = "kind")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    delta_cap: usize,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON written by `gen instance`.
    #[arg(long, conflicts_with = "family")]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum ColorKind {
    Defective {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        f: usize,
    },
    Frugal {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        beta: usize,
    },
    List {
        #[command(flatten)]
        graph: GraphArgs,
        /// JSON array of color lists, one per node. Without it, random lists
        /// of `--len` colors out of `--palette` are drawn.
        #[arg(long)]
        lists: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        len: usize,
        #[arg(long, default_value_t = 128)]
        palette: usize,
        #[arg(long = "C", default_value_t = 8.0)]
        c: f64,
    },
}

#[derive(Subcommand)]
enum VerifyWhat {
    /// Coloring JSON: output of `color`, or a bare array of colors.
    Coloring {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        f: usize,
        #[arg(long, default_value_t = 1)]
        beta: usize,
        #[arg(long)]
        lists: Option<PathBuf>,
    },
    /// Assignment JSON: output of `solve`, or a bare assignment.
    Assignment {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Defective,
    Frugal,
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
    Grid,
    Complete,
    Star,
    RandomRegular,
    Gnp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Chain,
    Sparse,
    Bucketing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Mt,
    Base,
    Bootstrap,
}

impl Kind {
    fn spec(self, d: usize, p: f64, delta_cap: usize) -> GraphSpec {
        match self {
            Kind::Path => GraphSpec::Path,
            Kind::Cycle => GraphSpec::Cycle,
            Kind::Grid => GraphSpec::Grid,
            Kind::Complete => GraphSpec::Complete,
            Kind::Star => GraphSpec::Star,
            Kind::RandomRegular => GraphSpec::RandomRegular { d },
            Kind::Gnp => GraphSpec::GnpCapped { p, delta_cap },
        }
    }
}

impl Family {
    fn spec(self) -> InstanceSpec {
        match self {
            Family::Chain => InstanceSpec::conjunction_chain(),
            Family::Sparse => InstanceSpec::sparse_conjunction(),
            Family::Bucketing => InstanceSpec::bucketing(),
        }
    }
}

impl Alg {
    fn algorithm(self, lambda: usize, n_star: Option<usize>) -> Algorithm {
        match self {
            Alg::Mt => Algorithm::Mt,
            Alg::Base => Algorithm::Base { lambda },
            Alg::Bootstrap => Algorithm::Bootstrap { lambda, n_star },
        }
    }
}

/// Failure kinds mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<local_lll::Error>() {
            Some(local_lll::Error::Parameter(_) | local_lll::Error::Parse { .. } | local_lll::Error::Json(_))
            | None => Failure::Usage(e),
            Some(_) => Failure::Run(e),
        }
    }
}

impl From<local_lll::Error> for Failure {
    fn from(e: local_lll::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether everything verified.
fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.cmd {
        Cmd::Gen { what, common } => {
            let ctx = SeedContext::new(common.seed);
            match what {
                GenWhat::Graph(a) => {
                    let g = generate_graph(&a.kind.spec(a.d, a.p, a.delta_cap), a.n, &ctx)?;
                    if common.format == Format::Csv {
                        let mut w = csv::Writer::from_writer(Vec::new());
                        w.write_record(["u", "v"]).map_err(anyhow::Error::from)?;
                        for (u, v) in g.edges() {
                            w.serialize((u, v)).map_err(anyhow::Error::from)?;
                        }
                        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
                        emit_text(&common, &String::from_utf8_lossy(&bytes))?;
                    } else {
                        emit(&common, &g)?;
                    }
                }
                GenWhat::Instance(a) => {
                    let inst = generate_instance(&a.family.spec(), a.n, &ctx)?;
                    emit_text(&common, &inst.to_json()?)?;
                }
            }
            Ok(true)
        }
        Cmd::Decompose { graph, lambda, common } => {
            let g = load_graph(&graph, &common)?;
            let nd = ball_carve(&g, lambda)?;
            let report = validate_decomposition(&g, &nd);
            let ok = report.passed;
            if common.format == Format::Csv {
                let mut text = String::from("node,block\n");
                let mut block_of = vec![0; g.n()];
                for (i, b) in nd.blocks.iter().enumerate() {
                    for &v in b {
                        block_of[v] = i;
                    }
                }
                for (v, b) in block_of.iter().enumerate() {
                    text.push_str(&format!("{v},{b}\n"));
                }
                emit_text(&common, &text)?;
            } else {
                emit(&common, &json!({ "decomposition": nd, "report": report, "verified": ok }))?;
            }
            Ok(ok)
        }
        Cmd::Solve { instance, alg, lambda, n_star, common } => {
            let inst = load_instance(&instance, &common)?;
            let out = solve(&inst, &alg.algorithm(lambda, n_star), &SeedContext::new(common.seed))?;
            let verified = inst.violated_events(&out.assignment).map_err(anyhow::Error::from)?.is_empty();
            if common.format == Format::Csv {
                let mut text = String::from("variable,value\n");
                for v in 0..out.assignment.len() {
                    let x = out.assignment.get(v).map(|x| x.to_string()).unwrap_or_default();
                    text.push_str(&format!("{v},{x}\n"));
                }
                emit_text(&common, &text)?;
            } else {
                emit(
                    &common,
                    &json!({
                        "assignment": out.assignment,
                        "stats": out.stats,
                        "ledger": out.ledger,
                        "verified": verified,
                    }),
                )?;
            }
            Ok(verified)
        }
        Cmd::Color { kind, common } => {
            let ctx = SeedContext::new(common.seed);
            let mut ledger = RoundLedger::new();
            let (g, result, mode) = match kind {
                ColorKind::Defective { graph, f } => {
                    let g = load_graph(&graph, &common)?;
                    let r = defective_coloring(&g, f, &ctx, &mut ledger)?;
                    (g, r, VerifyMode::Defective { f })
                }
                ColorKind::Frugal { graph, beta } => {
                    let g = load_graph(&graph, &common)?;
                    let r = frugal_coloring(&g, beta, &ctx, &mut ledger)?;
                    (g, r, VerifyMode::Frugal { beta })
                }
                ColorKind::List { graph, lists, len, palette, c } => {
                    let g = load_graph(&graph, &common)?;
                    let lists = match lists {
                        Some(p) => read_json::<Vec<Vec<usize>>>(&p)?,
                        None => {
                            if len == 0 || palette < len {
                                return Err(Failure::Usage(anyhow::anyhow!("need 1 <= --len <= --palette")));
                            }
                            random_lists(&g, len, palette, &ctx.named("lists"))
                        }
                    };
                    let r = list_coloring(&g, &lists, c, &ctx, &mut ledger)?;
                    (g, r, VerifyMode::List { lists })
                }
            };
            let report = verify_coloring(&g, &result, &mode);
            if common.format == Format::Csv {
                emit_text(&common, &colors_csv(&result.colors))?;
            } else {
                emit(&common, &json!({ "coloring": result, "report": report, "verified": report.passed }))?;
            }
            Ok(report.passed)
        }
        Cmd::Verify { what, common } => match what {
            VerifyWhat::Coloring { graph, coloring, mode, f, beta, lists } => {
                let g: Graph = read_json(&graph)?;
                let result = read_coloring(&coloring)?;
                if result.colors.len() != g.n() {
                    return Err(Failure::Usage(anyhow::anyhow!(
                        "coloring has {} entries for {} nodes",
                        result.colors.len(),
                        g.n()
                    )));
                }
                let mode = match mode {
                    ModeArg::Defective => VerifyMode::Defective { f },
                    ModeArg::Frugal => VerifyMode::Frugal { beta },
                    ModeArg::List => {
                        let p = lists.ok_or_else(|| Failure::Usage(anyhow::anyhow!("list mode needs --lists")))?;
                        VerifyMode::List { lists: read_json(&p)? }
                    }
                };
                let report = verify_coloring(&g, &result, &mode);
                emit(&common, &report)?;
                Ok(report.passed)
            }
            VerifyWhat::Assignment { instance, assignment } => {
                let inst = LLLInstance::from_json(&read_text(&instance)?).map_err(anyhow::Error::from)?;
                let v: Value = read_json(&assignment)?;
                let pa: PartialAssignment =
                    serde_json::from_value(v.get("assignment").cloned().unwrap_or(v)).map_err(anyhow::Error::from)?;
                if pa.len() != inst.num_vars() {
                    return Err(Failure::Usage(anyhow::anyhow!(
                        "assignment has {} variables, instance has {}",
                        pa.len(),
                        inst.num_vars()
                    )));
                }
                let violated = inst.violated_events(&pa).map_err(anyhow::Error::from)?;
                let ok = violated.is_empty();
                emit(&common, &json!({ "verified": ok, "violated": violated }))?;
                Ok(ok)
            }
        },
        Cmd::Bench { config, sizes, seeds, alg, family, lambda, common } => {
            let cfg = match config {
                Some(p) => read_json::<ExperimentConfig>(&p)?,
                None => ExperimentConfig {
                    generator: GraphSpec::Cycle,
                    instance: Some(family.spec()),
                    sizes,
                    seeds,
                    algorithm: alg.algorithm(lambda, None),
                    out: None,
                },
            };
            cfg.validate().map_err(Failure::Usage)?;
            let report = run_experiment(&cfg)?;
            let common = Common {
                out: common.out.or_else(|| cfg.out.clone()),
                ..common
            };
            if common.format == Format::Csv {
                emit_text(&common, &report_csv(&report)?)?;
            } else {
                emit(&common, &report)?;
            }
            Ok(report.passed)
        }
    }
}

fn load_graph(a: &GraphArgs, common: &Common) -> anyhow::Result<Graph> {
    match (&a.graph, a.kind) {
        (Some(p), _) => read_json(p),
        (None, Some(kind)) => {
            let n = a.n.context("--n is required with --kind")?;
            Ok(generate_graph(&kind.spec(a.d, a.p, a.delta_cap), n, &SeedContext::new(common.seed).named("graph"))?)
        }
        (None, None) => Err(local_lll::Error::Parameter("give --graph FILE or --kind with --n".into()).into()),
    }
}

fn load_instance(a: &InstanceArgs, common: &Common) -> anyhow::Result<LLLInstance> {
    match (&a.instance, a.family) {
        (Some(p), _) => Ok(LLLInstance::from_json(&read_text(p)?)?),
        (None, Some(family)) => {
            let n = a.n.context("--n is required with --family")?;
            Ok(generate_instance(&family.spec(), n, &SeedContext::new(common.seed).named("instance"))?)
        }
        (None, None) => Err(local_lll::Error::Parameter("give --instance FILE or --family with --n".into()).into()),
    }
}

fn read_coloring(p: &Path) -> anyhow::Result<ColoringResult> {
    let v: Value = read_json(p)?;
    let v = v.get("coloring").cloned().unwrap_or(v);
    if v.is_array() {
        let colors: Vec<usize> = serde_json::from_value(v)?;
        let mut distinct = colors.clone();
        distinct.sort_unstable();
        distinct.dedup();
        return Ok(ColoringResult {
            count: distinct.len(),
            colors,
            cap: f64::INFINITY,
            watermark: None,
            clamped: false,
            steps: Vec::new(),
            ledger: RoundLedger::new(),
        });
    }
    Ok(serde_json::from_value(v)?)
}

fn colors_csv(colors: &[usize]) -> String {
    let mut text = String::from("node,color\n");
    for (v, c) in colors.iter().enumerate() {
        text.push_str(&format!("{v},{c}\n"));
    }
    text
}

fn read_text(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))
}

fn emit<T: Serialize>(common: &Common, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(common, &text)
}

fn emit_text(common: &Common, text: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
