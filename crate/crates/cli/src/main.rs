//! Command-line driver: corpus sampling, exact expectations, spectra,
//! error bounds, budget planning, embeddings, and the two convergence
//! experiments, each as a subcommand with machine-readable output.
//!
//! Exit codes: 0 success, 1 validation error (bad graph or data), 2 usage
//! error (bad flags). Identical command lines produce byte-identical
//! outputs; timings go to stderr only.

mod report;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde_json::json;

use walklim::bounds::{
    bound_sweep, epsilon_for_confidence, fit_inverse_l, joint_failure_bound, write_sweep_tsv,
};
use walklim::embed::{normalized_objective_value, objective_value, train, ObjectiveConfig};
use walklim::graph::{Graph, GraphSummary, TransitionModel};
use walklim::limits::{
    corpus_error, expected_frequency_matrix, omega_matrix, write_matrix_coo_tsv, write_matrix_tsv,
    ErrorNorm,
};
use walklim::planner::{compare_strategies, plan};
use walklim::spectral::SpectrumReport;
use walklim::walker::{generate_corpus, relative_frequencies, Corpus, StartDistribution, WalkConfig};

use report::{
    E1Config, E1Point, E1Report, E2Config, E2Point, E2Report, StrategyResult, TOOL_VERSION,
};

#[derive(Parser)]
#[command(
    name = "walklim",
    version,
    about = "Random-walk corpora, their exact limits, mixing bounds, and walk-budget planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; each subcommand has a natural default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for corpus sampling (output is identical for any
    /// count).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON object supplying flags for the subcommand; explicit
    /// command-line flags win. Must come after the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a co-occurrence corpus and write it as TSV.
    Walk(WalkArgs),
    /// Exact expected frequency matrix or its asymptotic limit.
    Limit(LimitArgs),
    /// Graph summary: counts, period, bipartiteness, degree range.
    Summary(GraphArgs),
    /// Normalized-Laplacian spectrum, mixing factors, Doeblin constants.
    Spectrum(GraphArgs),
    /// Expectation-error bounds U over a grid of walk lengths.
    Bounds(BoundsArgs),
    /// Choose N and L for a step budget.
    Plan(PlanArgs),
    /// Train embeddings from a corpus.
    Embed(EmbedArgs),
    /// Corpus convergence experiment: error vs N or vs L.
    E1(E1Args),
    /// Strategy comparison across budgets K.
    E2(E2Args),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file: `src dst [weight]` per line, `#` comments.
    #[arg(long)]
    graph: PathBuf,

    /// Read the edge list as a directed graph.
    #[arg(long)]
    directed: bool,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// Number of walks N.
    #[arg(long = "N")]
    walks: usize,

    /// Walk length L (must exceed the window).
    #[arg(long = "L")]
    length: usize,

    /// Window size T.
    #[arg(long = "T")]
    window: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// uniform | stationary | one-hot:V | explicit:p0,p1,...
    #[arg(long, default_value = "uniform")]
    start: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LimitKind {
    Expected,
    Omega,
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// Which matrix to emit.
    #[arg(long, value_enum)]
    kind: LimitKind,

    /// Walk length L (required for the expected matrix).
    #[arg(long = "L")]
    length: Option<usize>,

    /// Window size T.
    #[arg(long = "T")]
    window: usize,

    #[arg(long, default_value = "uniform")]
    start: String,

    /// Emit sparse COO rows instead of a dense matrix.
    #[arg(long)]
    coo: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// Window size T.
    #[arg(long = "T")]
    window: usize,

    /// Walk lengths to sweep, comma separated.
    #[arg(long = "l-grid")]
    l_grid: String,

    #[arg(long, default_value = "uniform")]
    start: String,

    /// Walk count for the failure-probability report.
    #[arg(long = "N")]
    walks: Option<usize>,

    /// Failure probability used to derive epsilon when --epsilon is absent.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,

    /// Deviation threshold for the failure-probability report.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct PlanArgs {
    /// Excess step budget K = N (L - T).
    #[arg(long = "K")]
    budget: u64,

    #[arg(long, default_value_t = 0.01)]
    delta: f64,

    /// Absorbed graph constant.
    #[arg(long, default_value_t = 1.0)]
    g: f64,

    /// Window size T.
    #[arg(long = "T", default_value_t = 10)]
    window: usize,

    /// Also list the max-walks and single-walk strategies.
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct EmbedArgs {
    /// Corpus TSV produced by `walk`; alternatively sample one on the fly
    /// with --graph and the walk flags.
    #[arg(long, conflicts_with = "graph")]
    corpus: Option<PathBuf>,

    #[arg(long)]
    graph: Option<PathBuf>,

    #[arg(long)]
    directed: bool,

    #[arg(long = "N", default_value_t = 100)]
    walks: usize,

    #[arg(long = "L", default_value_t = 40)]
    length: usize,

    #[arg(long = "T", default_value_t = 10)]
    window: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value = "uniform")]
    start: String,

    /// Embedding dimension.
    #[arg(long, default_value_t = 8)]
    dim: usize,

    #[arg(long, default_value_t = 200)]
    iterations: usize,

    #[arg(long = "learning-rate", default_value_t = 0.05)]
    learning_rate: f64,

    /// Regularizer weight.
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,

    #[arg(long = "init-seed", default_value_t = 0)]
    init_seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    #[value(name = "N", alias = "n")]
    N,
    #[value(name = "L", alias = "l")]
    L,
}

#[derive(Args)]
struct E1Args {
    #[command(flatten)]
    graph: GraphArgs,

    /// Vary the walk count N or the walk length L.
    #[arg(long, value_enum)]
    axis: Axis,

    /// Grid of values for the chosen axis, comma separated.
    #[arg(long)]
    grid: Option<String>,

    /// Walk count used when varying L.
    #[arg(long = "fixed-N", default_value_t = 80)]
    fixed_walks: usize,

    /// Walk length used when varying N.
    #[arg(long = "fixed-L", default_value_t = 40)]
    fixed_length: usize,

    #[arg(long = "T", default_value_t = 10)]
    window: usize,

    /// Number of seeds averaged per grid point.
    #[arg(long, default_value_t = 5)]
    seeds: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value = "uniform")]
    start: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyChoice {
    All,
    MaxWalks,
    SingleWalk,
    Heuristic,
}

#[derive(Args)]
struct E2Args {
    #[command(flatten)]
    graph: GraphArgs,

    /// Budgets K to compare, comma separated.
    #[arg(long = "k-grid", default_value = "1024,4096")]
    k_grid: String,

    #[arg(long = "T", default_value_t = 10)]
    window: usize,

    /// Failure probability fed to the heuristic.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,

    #[arg(long, default_value_t = 20)]
    seeds: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Restrict the run to one strategy.
    #[arg(long, value_enum, default_value_t = StrategyChoice::All)]
    strategy: StrategyChoice,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Validation(String),
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) => m,
        }
    }
}

impl From<walklim::Error> for CliError {
    fn from(e: walklim::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match inject_config(argv) {
        Ok(v) => v,
        Err(e) => exit_with(e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(e.exit_code());
        }
    };
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    if let Err(e) = run(&cli) {
        exit_with(e);
    }
}

fn exit_with(e: CliError) -> ! {
    eprintln!("walklim: {}", e.message());
    std::process::exit(e.code())
}

/// Splices `--key value` pairs from the JSON config right after the
/// subcommand token, so explicit command-line flags override them.
fn inject_config(mut argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path: Option<String> = None;
    for (i, arg) in argv.iter().enumerate() {
        if arg == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(v) = arg.strip_prefix("--config=") {
            path = Some(v.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    if argv.len() < 2 || argv[1].starts_with('-') {
        return Err(CliError::usage(
            "--config requires the subcommand to come first",
        ));
    }
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::usage(format!("cannot read config {path}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {path} is not valid JSON: {e}")))?;
    let object = value
        .as_object()
        .ok_or_else(|| CliError::usage(format!("config {path} must be a JSON object")))?;
    let explicit: std::collections::HashSet<&str> = argv[2..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();
    let mut injected = Vec::new();
    for (key, v) in object {
        if explicit.contains(key.as_str()) {
            continue;
        }
        let flag = format!("--{key}");
        match v {
            serde_json::Value::Bool(true) => injected.push(flag),
            serde_json::Value::Bool(false) => {}
            serde_json::Value::String(s) => {
                injected.push(flag);
                injected.push(s.clone());
            }
            serde_json::Value::Number(n) => {
                injected.push(flag);
                injected.push(n.to_string());
            }
            _ => {
                return Err(CliError::usage(format!(
                    "config key '{key}' must be a scalar"
                )))
            }
        }
    }
    argv.splice(2..2, injected);
    Ok(argv)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Walk(args) => cmd_walk(cli, args),
        Command::Limit(args) => cmd_limit(cli, args),
        Command::Summary(args) => cmd_summary(cli, args),
        Command::Spectrum(args) => cmd_spectrum(cli, args),
        Command::Bounds(args) => cmd_bounds(cli, args),
        Command::Plan(args) => cmd_plan(cli, args),
        Command::Embed(args) => cmd_embed(cli, args),
        Command::E1(args) => cmd_e1(cli, args),
        Command::E2(args) => cmd_e2(cli, args),
    }
}

fn load_model(args: &GraphArgs) -> Result<TransitionModel, CliError> {
    load_model_from(&args.graph, args.directed)
}

fn load_model_from(path: &Path, directed: bool) -> Result<TransitionModel, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))?;
    let graph = Graph::from_edge_list(BufReader::new(file), directed)?;
    Ok(TransitionModel::build(graph)?)
}

fn parse_start(s: &str) -> Result<StartDistribution, CliError> {
    if s == "uniform" {
        return Ok(StartDistribution::Uniform);
    }
    if s == "stationary" {
        return Ok(StartDistribution::Stationary);
    }
    if let Some(v) = s.strip_prefix("one-hot:") {
        let vertex = v
            .parse::<usize>()
            .map_err(|_| CliError::usage(format!("bad one-hot vertex '{v}'")))?;
        return Ok(StartDistribution::OneHot(vertex));
    }
    if let Some(list) = s.strip_prefix("explicit:") {
        let probs = list
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| CliError::usage(format!("bad explicit distribution '{list}'")))?;
        return Ok(StartDistribution::Explicit(probs));
    }
    Err(CliError::usage(format!(
        "unknown start distribution '{s}' (uniform | stationary | one-hot:V | explicit:p0,p1,...)"
    )))
}

fn parse_grid(s: &str, what: &str) -> Result<Vec<u64>, CliError> {
    let values = s
        .split(',')
        .filter(|tok| !tok.trim().is_empty())
        .map(|tok| tok.trim().parse::<u64>())
        .collect::<Result<Vec<u64>, _>>()
        .map_err(|_| CliError::usage(format!("bad {what} grid '{s}'")))?;
    if values.is_empty() {
        return Err(CliError::usage(format!("{what} grid is empty")));
    }
    Ok(values)
}

fn resolve_format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn emit(cli: &Cli, content: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn walk_config(
    walks: usize,
    length: usize,
    window: usize,
    seed: u64,
    start: &str,
) -> Result<WalkConfig, CliError> {
    if window < 1 {
        return Err(CliError::usage("window T must be >= 1"));
    }
    if length <= window {
        return Err(CliError::usage(format!(
            "walk length L = {length} must exceed window T = {window}"
        )));
    }
    if walks < 1 {
        return Err(CliError::usage("need at least one walk (N >= 1)"));
    }
    Ok(WalkConfig::new(walks, length, window, seed).with_start(parse_start(start)?))
}

fn cmd_walk(cli: &Cli, args: &WalkArgs) -> Result<(), CliError> {
    if resolve_format(cli, Format::Tsv) == Format::Json {
        return Err(CliError::usage("corpus output is TSV only"));
    }
    let tm = load_model(&args.graph)?;
    let cfg = walk_config(args.walks, args.length, args.window, args.seed, &args.start)?;
    let corpus = generate_corpus(&tm, &cfg)?;
    let mut buf = Vec::new();
    corpus.write_tsv(&mut buf)?;
    emit(cli, std::str::from_utf8(&buf).expect("tsv is utf-8"))
}

fn cmd_limit(cli: &Cli, args: &LimitArgs) -> Result<(), CliError> {
    let tm = load_model(&args.graph)?;
    let start = parse_start(&args.start)?;
    let (matrix, length) = match args.kind {
        LimitKind::Expected => {
            let length = args
                .length
                .ok_or_else(|| CliError::usage("--kind expected requires --L"))?;
            if length <= args.window {
                return Err(CliError::usage(format!(
                    "walk length L = {length} must exceed window T = {}",
                    args.window
                )));
            }
            (
                expected_frequency_matrix(&tm, length, args.window, &start)?,
                Some(length),
            )
        }
        LimitKind::Omega => (omega_matrix(&tm, args.window), None),
    };
    match resolve_format(cli, Format::Tsv) {
        Format::Tsv => {
            let mut buf = Vec::new();
            if args.coo {
                write_matrix_coo_tsv(&mut buf, &matrix)?;
            } else {
                write_matrix_tsv(&mut buf, &matrix)?;
            }
            emit(cli, std::str::from_utf8(&buf).expect("tsv is utf-8"))
        }
        Format::Json => {
            let value = json!({
                "kind": match args.kind {
                    LimitKind::Expected => "expected",
                    LimitKind::Omega => "omega",
                },
                "L": length,
                "T": args.window,
                "start": args.start,
                "matrix": to_json_rows(&matrix),
            });
            emit(cli, &pretty(&value))
        }
    }
}

fn cmd_summary(cli: &Cli, args: &GraphArgs) -> Result<(), CliError> {
    let tm = load_model(args)?;
    let summary = GraphSummary::from_model(&tm);
    match resolve_format(cli, Format::Json) {
        Format::Json => {
            let mut text = summary.to_json();
            text.push('\n');
            emit(cli, &text)
        }
        Format::Tsv => {
            let text = format!(
                "vertex_count\t{}\nedge_count\t{}\ndirected\t{}\nperiod\t{}\nbipartite\t{}\ndegree_min\t{}\ndegree_max\t{}\n",
                summary.vertex_count,
                summary.edge_count,
                summary.directed,
                summary.period,
                summary.bipartite,
                summary.degree_min,
                summary.degree_max
            );
            emit(cli, &text)
        }
    }
}

fn cmd_spectrum(cli: &Cli, args: &GraphArgs) -> Result<(), CliError> {
    let tm = load_model(args)?;
    let report = SpectrumReport::from_model(&tm)?;
    match resolve_format(cli, Format::Json) {
        Format::Json => {
            let value = serde_json::to_value(&report).expect("serializable");
            emit(cli, &pretty(&value))
        }
        Format::Tsv => {
            let mut text = format!(
                "#mu_star={:.16e} nu_star={:.16e} bipartite={}\n",
                report.mu_star, report.nu_star, report.bipartite
            );
            if let Some(d) = &report.doeblin {
                text.push_str(&format!(
                    "#doeblin r={} theta={:.16e} alpha={:.16e} C={:.16e}\n",
                    d.r, d.theta, d.alpha, d.c
                ));
            }
            for (k, lambda) in report.eigenvalues.iter().enumerate() {
                text.push_str(&format!("{}\t{lambda:.16e}\n", k + 1));
            }
            emit(cli, &text)
        }
    }
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Result<(), CliError> {
    let tm = load_model(&args.graph)?;
    let start = parse_start(&args.start)?;
    let lengths: Vec<usize> = parse_grid(&args.l_grid, "L")?
        .into_iter()
        .map(|l| l as usize)
        .collect();
    if let Some(&bad) = lengths.iter().find(|&&l| l <= args.window) {
        return Err(CliError::usage(format!(
            "walk length L = {bad} must exceed window T = {}",
            args.window
        )));
    }

    // Periodic directed chains carry no closed-form constant; report the
    // empirical 1/L fit instead.
    if tm.graph().is_directed() && tm.period() > 1 {
        let omega = omega_matrix(&tm, args.window);
        let mut points = Vec::new();
        for &length in &lengths {
            let e = expected_frequency_matrix(&tm, length, args.window, &start)?;
            points.push((length, corpus_error(&e, &omega, ErrorNorm::MaxAbs)?));
        }
        let ls: Vec<f64> = points.iter().map(|&(l, _)| l as f64).collect();
        let errs: Vec<f64> = points.iter().map(|&(_, e)| e).collect();
        let fit = fit_inverse_l(&ls, &errs)?;
        return match resolve_format(cli, Format::Tsv) {
            Format::Json => {
                let value = json!({
                    "regime": "joint_directed_periodic_rate_only",
                    "period": tm.period(),
                    "fit": {"c": fit.c, "r_squared": fit.r_squared},
                    "points": points
                        .iter()
                        .map(|&(l, e)| json!({"L": l, "max_abs_error": e}))
                        .collect::<Vec<_>>(),
                });
                emit(cli, &pretty(&value))
            }
            Format::Tsv => {
                let mut text = format!(
                    "#regime=joint_directed_periodic_rate_only period={} c={:.16e} r_squared={:.16e}\n#L\tmax_abs_error\n",
                    tm.period(),
                    fit.c,
                    fit.r_squared
                );
                for (l, e) in points {
                    text.push_str(&format!("{l}\t{e:.16e}\n"));
                }
                emit(cli, &text)
            }
        };
    }

    let rows = bound_sweep(&tm, &start, args.window, &lengths)?;
    let regime = if tm.graph().is_directed() {
        "joint_directed_aperiodic"
    } else {
        "joint_undirected"
    };

    let mut reports = Vec::new();
    if let Some(walks) = args.walks {
        let epsilon = match args.epsilon {
            Some(e) => e,
            None => epsilon_for_confidence(walks, args.delta),
        };
        for &length in &lengths {
            let u_max = rows
                .iter()
                .filter(|r| r.length == length)
                .map(|r| r.u)
                .fold(0.0f64, f64::max);
            let failure = joint_failure_bound(walks, epsilon, u_max).ok();
            reports.push(json!({
                "L": length,
                "N": walks,
                "epsilon": epsilon,
                "u_max": u_max,
                "failure_prob": failure,
                "vacuous": failure.is_none_or(|p| p > 1.0),
            }));
        }
    }

    match resolve_format(cli, Format::Tsv) {
        Format::Tsv => {
            let mut buf = Vec::new();
            write_sweep_tsv(&mut buf, &rows)?;
            emit(cli, std::str::from_utf8(&buf).expect("tsv is utf-8"))
        }
        Format::Json => {
            let value = json!({
                "regime": regime,
                "rows": rows,
                "reports": reports,
            });
            emit(cli, &pretty(&value))
        }
    }
}

fn cmd_plan(cli: &Cli, args: &PlanArgs) -> Result<(), CliError> {
    if args.budget < 1 {
        return Err(CliError::usage("budget K must be >= 1"));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::usage("delta must lie in (0, 1)"));
    }
    if !(args.g > 0.0) {
        return Err(CliError::usage("g must be positive"));
    }
    if args.window < 1 {
        return Err(CliError::usage("window T must be >= 1"));
    }
    let planned = plan(args.budget, args.delta, args.g, args.window)?;
    match resolve_format(cli, Format::Json) {
        Format::Json => {
            let mut value = serde_json::to_value(&planned).expect("serializable");
            if args.compare {
                let strategies = compare_strategies(args.budget, args.window)?;
                value["strategies"] = serde_json::to_value(&strategies).expect("serializable");
            }
            emit(cli, &pretty(&value))
        }
        Format::Tsv => {
            let text = format!(
                "#K\tdelta\tg\tT\tN\tL\tpredicted_epsilon\n{}\t{}\t{}\t{}\t{}\t{}\t{:.16e}\n",
                planned.budget,
                planned.delta,
                planned.g,
                planned.window,
                planned.walks,
                planned.length,
                planned.predicted_epsilon
            );
            emit(cli, &text)
        }
    }
}

fn cmd_embed(cli: &Cli, args: &EmbedArgs) -> Result<(), CliError> {
    let (corpus, vertex_count) = match (&args.corpus, &args.graph) {
        (Some(path), None) => {
            let file = fs::File::open(path).map_err(|e| {
                CliError::Validation(format!("cannot open {}: {e}", path.display()))
            })?;
            let corpus = Corpus::read_tsv(BufReader::new(file))?;
            let n = corpus
                .counts()
                .map(|(v, c, _)| v.max(c) + 1)
                .max()
                .unwrap_or(0);
            (corpus, n)
        }
        (None, Some(path)) => {
            let tm = load_model_from(path, args.directed)?;
            let cfg = walk_config(args.walks, args.length, args.window, args.seed, &args.start)?;
            let corpus = generate_corpus(&tm, &cfg)?;
            (corpus, tm.vertex_count())
        }
        _ => {
            return Err(CliError::usage(
                "embed needs exactly one of --corpus or --graph",
            ))
        }
    };
    let mut cfg = ObjectiveConfig::new(args.dim, args.learning_rate, args.iterations, args.init_seed);
    cfg.lambda = args.lambda;
    let embedding = train(&corpus, vertex_count, &cfg)?;
    match resolve_format(cli, Format::Tsv) {
        Format::Tsv => {
            let mut buf = Vec::new();
            embedding.write_tsv(&mut buf)?;
            emit(cli, std::str::from_utf8(&buf).expect("tsv is utf-8"))
        }
        Format::Json => {
            let value = json!({
                "dim": embedding.dim(),
                "vertex_count": embedding.vertex_count(),
                "objective": objective_value(&embedding, &corpus, &cfg),
                "normalized_objective": normalized_objective_value(&embedding, &corpus, &cfg)?,
                "embedding": to_json_rows(&embedding.z),
            });
            emit(cli, &pretty(&value))
        }
    }
}

fn cmd_e1(cli: &Cli, args: &E1Args) -> Result<(), CliError> {
    let started = Instant::now();
    let tm = load_model(&args.graph)?;
    let start = parse_start(&args.start)?;
    if args.seeds < 1 {
        return Err(CliError::usage("need at least one seed"));
    }
    let grid = match &args.grid {
        Some(s) => parse_grid(s, "axis")?,
        None => match args.axis {
            Axis::N => vec![10, 100, 1_000, 10_000],
            Axis::L => vec![11, 20, 50, 100, 1_000],
        },
    };
    if grid.iter().any(|&x| x == 0) {
        return Err(CliError::usage("grid values must be positive"));
    }
    if args.axis == Axis::L {
        if let Some(&bad) = grid.iter().find(|&&l| l as usize <= args.window) {
            return Err(CliError::usage(format!(
                "walk length L = {bad} must exceed window T = {}",
                args.window
            )));
        }
    }
    if args.fixed_length <= args.window {
        return Err(CliError::usage(format!(
            "fixed L = {} must exceed window T = {}",
            args.fixed_length, args.window
        )));
    }

    let n = tm.vertex_count();
    // Varying N at fixed L measures sampling noise against the exact
    // finite-L expectation; varying L measures drift towards omega.
    let reference = match args.axis {
        Axis::N => expected_frequency_matrix(&tm, args.fixed_length, args.window, &start)?,
        Axis::L => omega_matrix(&tm, args.window),
    };

    let mut points = Vec::new();
    for &x in &grid {
        let mut errors = Vec::new();
        for s in 0..args.seeds {
            let (walks, length) = match args.axis {
                Axis::N => (x as usize, args.fixed_length),
                Axis::L => (args.fixed_walks, x as usize),
            };
            let cfg =
                WalkConfig::new(walks, length, args.window, args.seed + s).with_start(start.clone());
            let corpus = generate_corpus(&tm, &cfg)?;
            let freqs = relative_frequencies(&corpus, n)?;
            errors.push(corpus_error(&freqs, &reference, ErrorNorm::Frobenius)?);
        }
        let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
        points.push(E1Point {
            x,
            mean_error,
            errors,
        });
    }

    let axis_name = match args.axis {
        Axis::N => "N",
        Axis::L => "L",
    };
    let report = E1Report {
        experiment: format!("e1_{}", axis_name.to_lowercase()),
        version: TOOL_VERSION.to_string(),
        config: E1Config {
            graph: args.graph.graph.display().to_string(),
            directed: args.graph.directed,
            axis: axis_name.to_string(),
            grid,
            fixed_walks: args.fixed_walks,
            fixed_length: args.fixed_length,
            window: args.window,
            seeds: args.seeds,
            seed: args.seed,
            start: args.start.clone(),
        },
        points,
    };
    eprintln!("# e1 elapsed_ms={}", started.elapsed().as_millis());
    match resolve_format(cli, Format::Json) {
        Format::Json => {
            let value = serde_json::to_value(&report).expect("serializable");
            emit(cli, &pretty(&value))
        }
        Format::Tsv => emit(cli, &report.to_tsv()),
    }
}

fn cmd_e2(cli: &Cli, args: &E2Args) -> Result<(), CliError> {
    let started = Instant::now();
    let tm = load_model(&args.graph)?;
    if args.seeds < 1 {
        return Err(CliError::usage("need at least one seed"));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::usage("delta must lie in (0, 1)"));
    }
    let budgets = parse_grid(&args.k_grid, "K")?;
    if budgets.iter().any(|&k| k < 1) {
        return Err(CliError::usage("budgets K must be >= 1"));
    }

    let n = tm.vertex_count();
    let omega = omega_matrix(&tm, args.window);
    let measure = |walks: usize, length: usize| -> Result<StrategyResult, CliError> {
        let mut errors = Vec::new();
        for s in 0..args.seeds {
            let cfg = WalkConfig::new(walks, length, args.window, args.seed + s);
            let corpus = generate_corpus(&tm, &cfg)?;
            let freqs = relative_frequencies(&corpus, n)?;
            errors.push(corpus_error(&freqs, &omega, ErrorNorm::Frobenius)?);
        }
        let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
        Ok(StrategyResult {
            walks,
            length,
            mean_error,
            errors,
        })
    };

    let want =
        |choice: StrategyChoice| args.strategy == StrategyChoice::All || args.strategy == choice;
    let mut points = Vec::new();
    for &budget in &budgets {
        let heuristic_plan = plan(budget, args.delta, 1.0, args.window)?;
        points.push(E2Point {
            budget,
            max_walks: want(StrategyChoice::MaxWalks)
                .then(|| measure(budget as usize, args.window + 1))
                .transpose()?,
            single_walk: want(StrategyChoice::SingleWalk)
                .then(|| measure(1, args.window + budget as usize))
                .transpose()?,
            heuristic: want(StrategyChoice::Heuristic)
                .then(|| measure(heuristic_plan.walks, heuristic_plan.length))
                .transpose()?,
        });
    }

    let strategy_name = match args.strategy {
        StrategyChoice::All => "all",
        StrategyChoice::MaxWalks => "max_walks",
        StrategyChoice::SingleWalk => "single_walk",
        StrategyChoice::Heuristic => "heuristic",
    };
    let report = E2Report {
        experiment: "e2".to_string(),
        version: TOOL_VERSION.to_string(),
        config: E2Config {
            graph: args.graph.graph.display().to_string(),
            directed: args.graph.directed,
            k_grid: budgets,
            window: args.window,
            delta: args.delta,
            seeds: args.seeds,
            seed: args.seed,
            strategy: strategy_name.to_string(),
        },
        points,
    };
    eprintln!("# e2 elapsed_ms={}", started.elapsed().as_millis());
    match resolve_format(cli, Format::Json) {
        Format::Json => {
            let value = serde_json::to_value(&report).expect("serializable");
            emit(cli, &pretty(&value))
        }
        Format::Tsv => emit(cli, &report.to_tsv()),
    }
}
