use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use mwis_core::chils::{
    run_chils, ChilsConfig, Deterministic, DEFAULT_P, DEFAULT_PERTURB_THRESHOLD,
};
use mwis_core::exact::{solve_exact, Budget};
use mwis_core::gnn::{screen, GnnModel};
use mwis_core::graph::{read_graph_file, read_solution, write_graph, write_solution};
use mwis_core::graph::{DynamicGraph, StaticGraph, VertexId};
use mwis_core::labelgen::{
    after_cheap, generate_labels, split_vertices, write_labels_csv, write_splits_csv,
};
use mwis_core::local_search::{greedy_solution, run_baseline, LsLimit, Solution, DEFAULT_MQ};
use mwis_core::pipeline::{pipeline_solve, verify_solution, KernelSolver, PipelineConfig};
use mwis_core::profile::{parse_records, perf_profile, write_curves, ProfileKind};
use mwis_core::reductions::{ReducerBudgets, RuleFlags, RuleId};
use mwis_core::scheduler::{run_reduce, ModelSet, ReduceConfig, ScreeningMode};
use mwis_core::DEFAULT_SEED;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mwis",
    version,
    about = "Maximum weight independent set toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply data reductions and write the kernel.
    Reduce(ReduceArgs),
    /// Reduce, solve the kernel and restore a solution.
    Solve(SolveArgs),
    /// Branch and bound on the whole graph.
    SolveExact(ExactArgs),
    /// Single-solution local search.
    Baseline(BaselineArgs),
    /// Portfolio local search on concurrent difference cores.
    Chils(ChilsArgs),
    /// Per-vertex reduction labels for training.
    Labels(LabelsArgs),
    /// Vertices a model suggests for its rule.
    Screen(ScreenArgs),
    /// Performance profiles from run records.
    Profile(ProfileArgs),
    /// Check a solution file against a graph.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ReducerArgs {
    /// no-gnn, never, always, initial or initial-tight.
    #[arg(long, default_value_t = ScreeningMode::default())]
    mode: ScreeningMode,
    /// Directory holding one `<rule>.json` model per expensive rule.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    enumeration_limit: Option<usize>,
    #[arg(long)]
    oracle_nodes: Option<u64>,
    /// Per-vertex rule time cap in milliseconds.
    #[arg(long)]
    vertex_time_ms: Option<u64>,
    #[arg(long)]
    global_fraction: Option<f64>,
    #[arg(long)]
    almost_twin_alpha: bool,
    #[arg(long)]
    full_unconfined: bool,
}

impl ReducerArgs {
    fn budgets(&self) -> ReducerBudgets {
        let mut b = ReducerBudgets::default();
        if let Some(x) = self.enumeration_limit {
            b.enumeration_limit = x;
        }
        if let Some(x) = self.oracle_nodes {
            b.oracle_nodes = x;
        }
        if let Some(x) = self.vertex_time_ms {
            b.vertex_time = Duration::from_millis(x);
        }
        if let Some(x) = self.global_fraction {
            b.global_fraction = x;
        }
        b
    }

    fn flags(&self) -> RuleFlags {
        RuleFlags {
            almost_twin_alpha: self.almost_twin_alpha,
            full_unconfined: self.full_unconfined,
        }
    }

    fn config(&self) -> ReduceConfig {
        ReduceConfig {
            mode: self.mode,
            budgets: self.budgets(),
            flags: self.flags(),
        }
    }

    fn models(&self) -> Result<ModelSet, Failure> {
        match &self.models {
            Some(dir) => ModelSet::load_dir(dir).map_err(input),
            None => Ok(ModelSet::new()),
        }
    }
}

#[derive(Args)]
struct ReduceArgs {
    graph: PathBuf,
    #[command(flatten)]
    reducer: ReducerArgs,
    /// Kernel graph output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Trace of applied rules, one per line.
    #[arg(short, long)]
    log: Option<PathBuf>,
    /// Statistics output; printed to stdout when absent.
    #[arg(short, long)]
    stats: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SolverKind {
    Exact,
    Baseline,
    Chils,
}

#[derive(Args)]
struct SolveArgs {
    graph: PathBuf,
    #[command(flatten)]
    reducer: ReducerArgs,
    #[arg(long, value_enum, default_value = "baseline")]
    solver: SolverKind,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Local search iterations for the baseline solver.
    #[arg(long, default_value_t = 100_000)]
    iters: u64,
    /// Seconds for the chils solver.
    #[arg(long, default_value_t = 10.0)]
    time: f64,
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MQ)]
    mq: usize,
    /// Seconds.
    #[arg(long, conflicts_with = "iters")]
    time: Option<f64>,
    #[arg(long)]
    iters: Option<u64>,
    /// Starting solution file.
    #[arg(long)]
    warm: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ChilsArgs {
    graph: PathBuf,
    #[arg(short, default_value_t = DEFAULT_P)]
    p: usize,
    /// Seconds per full-graph phase.
    #[arg(long, default_value_t = 10.0)]
    tg: f64,
    /// Seconds per core phase.
    #[arg(long, default_value_t = 10.0)]
    tc: f64,
    #[arg(long, default_value_t = DEFAULT_MQ)]
    mq: usize,
    /// Total seconds.
    #[arg(long, default_value_t = 60.0)]
    time: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    warm: Option<PathBuf>,
    /// Replace time limits by LS_ITERS per phase and CHILS_ITERS rounds.
    #[arg(long, num_args = 2, value_names = ["LS_ITERS", "CHILS_ITERS"])]
    deterministic: Option<Vec<u64>>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = DEFAULT_PERTURB_THRESHOLD)]
    perturb_threshold: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-iteration trace as comma-separated lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct LabelsArgs {
    graph: PathBuf,
    #[arg(long)]
    rule: RuleId,
    /// Label the kernel left by the cheap rules instead of the input.
    #[arg(long)]
    after_cheap: bool,
    /// Where the labeled kernel goes; defaults to the labels path with a
    /// `.graph` extension.
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    /// Train/val/test split file.
    #[arg(long)]
    splits: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Graph name in the CSV; defaults to the file stem.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    enumeration_limit: Option<usize>,
    #[arg(long)]
    oracle_nodes: Option<u64>,
}

#[derive(Args)]
struct ScreenArgs {
    graph: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    /// Records as instance,algorithm,weight,time lines.
    records: PathBuf,
    #[arg(long, default_value = "quality")]
    kind: ProfileKind,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    solution: PathBuf,
    /// Expected weight.
    #[arg(long)]
    weight: Option<i64>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Verify(String),
}

fn input(e: impl Display) -> Failure {
    Failure::Input(e.to_string())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<StaticGraph, Failure> {
    read_graph_file(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_solution(path: &Path, g: &StaticGraph) -> Result<Vec<VertexId>, Failure> {
    read_solution(&read_text(path)?, g.n())
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn seconds(s: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(s).map_err(|_| Failure::Input(format!("invalid duration {s}")))
}

/// Re-verifies against the input graph, then prints the weight and writes
/// the solution file if requested.
fn emit(g: &StaticGraph, set: &[VertexId], output: Option<&Path>) -> Result<(), Failure> {
    let weight = g.set_weight(set);
    verify_solution(g, set, weight).map_err(Failure::Verify)?;
    println!("weight: {weight}");
    println!("size: {}", set.len());
    if let Some(path) = output {
        write_text(path, &write_solution(set))?;
    }
    Ok(())
}

fn reduce(a: ReduceArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let models = a.reducer.models()?;
    let r =
        run_reduce(DynamicGraph::from_static(&g), &a.reducer.config(), &models).map_err(input)?;
    if let Some(path) = &a.output {
        write_text(path, &write_graph(&r.graph.to_static().0))?;
    }
    if let Some(path) = &a.log {
        let mut text = String::new();
        for e in r.log.trace() {
            let _ = writeln!(text, "{e}");
        }
        write_text(path, &text)?;
    }
    let stats = r.stats.to_string();
    match &a.stats {
        Some(path) => write_text(path, &stats)?,
        None => print!("{stats}"),
    }
    Ok(())
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let models = a.reducer.models()?;
    let solver = match a.solver {
        SolverKind::Exact => KernelSolver::Exact(Budget::nodes(a.node_budget)),
        SolverKind::Baseline => KernelSolver::Baseline {
            limit: LsLimit::iterations(a.iters),
            mq: DEFAULT_MQ,
            seed: a.seed,
        },
        SolverKind::Chils => KernelSolver::Chils(ChilsConfig {
            time: seconds(a.time)?,
            seed: a.seed,
            ..ChilsConfig::default()
        }),
    };
    let cfg = PipelineConfig {
        reduce: a.reducer.config(),
        solver,
    };
    let r = pipeline_solve(&g, &cfg, &models).map_err(|e| match e {
        mwis_core::pipeline::PipelineError::Verification(m) => Failure::Verify(m),
        other => input(other),
    })?;
    println!("kernel_vertices: {}", r.kernel_vertices);
    println!("kernel_edges: {}", r.kernel_edges);
    println!("offset: {}", r.offset);
    println!("kernel_weight: {}", r.kernel_weight);
    println!("optimal: {}", r.optimal);
    println!("reduce_time_s: {:.6}", r.stats.time.as_secs_f64());
    println!("solve_time_s: {:.6}", r.solve_time.as_secs_f64());
    emit(&g, &r.solution, a.output.as_deref())
}

fn solve_exact_cmd(a: ExactArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let r = solve_exact(&g, &Budget::nodes(a.node_budget));
    println!("optimal: {}", r.is_optimal());
    emit(&g, &r.set, a.output.as_deref())
}

fn baseline(a: BaselineArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let start = match &a.warm {
        Some(path) => Solution::from_set(&g, &load_solution(path, &g)?).map_err(input)?,
        None => greedy_solution(&g, a.seed),
    };
    let limit = match (a.time, a.iters) {
        (Some(t), _) => LsLimit::time(seconds(t)?),
        (None, Some(k)) => LsLimit::iterations(k),
        (None, None) => LsLimit::iterations(100_000),
    };
    let clock = Instant::now();
    let sol = run_baseline(&g, start, a.mq, &limit, a.seed);
    println!("time_s: {:.6}", clock.elapsed().as_secs_f64());
    emit(&g, &sol.vertices(), a.output.as_deref())
}

fn chils(a: ChilsArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let warm = match &a.warm {
        Some(path) => Some(Solution::from_set(&g, &load_solution(path, &g)?).map_err(input)?),
        None => None,
    };
    let cfg = ChilsConfig {
        p: a.p,
        mq: a.mq,
        t_g: seconds(a.tg)?,
        t_c: seconds(a.tc)?,
        time: seconds(a.time)?,
        perturb_threshold: a.perturb_threshold,
        deterministic: a.deterministic.map(|v| Deterministic {
            ls_iters: v[0],
            chils_iters: v[1],
        }),
        seed: a.seed,
        threads: a.threads,
    };
    let r = run_chils(&g, &cfg, warm.as_ref()).map_err(input)?;
    if let Some(path) = &a.trace {
        let mut text =
            String::from("iteration,best_weight,best_id,core_size,perturbed,elapsed_s\n");
        for it in &r.iterations {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{:.6}",
                it.iteration,
                it.best_weight,
                it.best_id,
                it.core_size,
                it.perturbed,
                it.elapsed.as_secs_f64()
            );
        }
        write_text(path, &text)?;
    }
    if let Some(bad) = r.acceptances.iter().find(|x| !x.independent) {
        return Err(Failure::Verify(format!(
            "iteration {} member {} accepted a dependent set",
            bad.iteration, bad.id
        )));
    }
    println!("iterations: {}", r.iterations.len());
    println!("best_id: {}", r.best_id);
    println!("time_to_best_s: {:.6}", r.time_to_best.as_secs_f64());
    emit(&g, &r.solution.vertices(), a.output.as_deref())
}

fn labels(a: LabelsArgs) -> Result<(), Failure> {
    let original = load_graph(&a.graph)?;
    let mut budgets = ReducerBudgets::default();
    if let Some(x) = a.enumeration_limit {
        budgets.enumeration_limit = x;
    }
    if let Some(x) = a.oracle_nodes {
        budgets.oracle_nodes = x;
    }
    let flags = RuleFlags::default();
    let g = if a.after_cheap {
        let k = after_cheap(&original, &budgets, &flags);
        let path = a
            .kernel
            .clone()
            .unwrap_or_else(|| a.output.with_extension("graph"));
        write_text(&path, &write_graph(&k))?;
        k
    } else {
        original
    };
    let name = a.name.clone().unwrap_or_else(|| {
        a.graph
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let records = generate_labels(&DynamicGraph::from_static(&g), a.rule, &budgets, &flags);
    write_text(&a.output, &write_labels_csv(&name, &records))?;
    if let Some(path) = &a.splits {
        write_text(
            path,
            &write_splits_csv(&name, &split_vertices(g.n(), a.seed)),
        )?;
    }
    let mut counts = [0usize; 3];
    for r in &records {
        counts[r.label as usize] += 1;
    }
    println!("vertices: {}", g.n());
    println!("labels: {} {} {}", counts[0], counts[1], counts[2]);
    Ok(())
}

fn screen_cmd(a: ScreenArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let model = GnnModel::load(&a.model).map_err(input)?;
    for v in screen(&model, &g).map_err(input)? {
        println!("{}", v + 1);
    }
    Ok(())
}

fn profile(a: ProfileArgs) -> Result<(), Failure> {
    let records = parse_records(&read_text(&a.records)?).map_err(input)?;
    let curves = perf_profile(&records, a.kind).map_err(input)?;
    let text = write_curves(&curves);
    match &a.output {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let set = load_solution(&a.solution, &g)?;
    let weight = a.weight.unwrap_or_else(|| g.set_weight(&set));
    verify_solution(&g, &set, weight).map_err(Failure::Verify)?;
    println!("weight: {weight}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Reduce(a) => reduce(a),
        Command::Solve(a) => solve(a),
        Command::SolveExact(a) => solve_exact_cmd(a),
        Command::Baseline(a) => baseline(a),
        Command::Chils(a) => chils(a),
        Command::Labels(a) => labels(a),
        Command::Screen(a) => screen_cmd(a),
        Command::Profile(a) => profile(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
