use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dyncausal::bench::{generate, make_timeline, NoiseSpec, SystemKind};
use dyncausal::eval::evaluate;
use dyncausal::experiment::{run_experiment, ExperimentConfig};
use dyncausal::gp::KernelKind;
use dyncausal::io;
use dyncausal::mdl::ScoreConfig;
use dyncausal::search::{discover, SearchConfig};
use dyncausal::{Error, Result};

#[derive(Parser)]
#[command(name = "dyncausal", version, about = "Causal discovery for dynamical systems")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmark system and write its trajectory and true graph.
    Gen(GenArgs),
    /// Discover the causal graph of a trajectory CSV.
    Discover(DiscoverArgs),
    /// Score a predicted graph against the truth.
    Eval(EvalArgs),
    /// Run a seed batch from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    system: SystemKind,
    /// Dimension (fixed-size families ignore this).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    irregularity: f64,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct DiscoverArgs {
    #[arg(long)]
    input: PathBuf,
    /// `rbf`, `poly` (degree 2) or `polyN`.
    #[arg(long, default_value = "rbf")]
    kernel: KernelKind,
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    self_loops: Toggle,
    /// Keep every pair as a forward candidate instead of only significant ones.
    #[arg(long)]
    no_prefilter: bool,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_graph: Option<PathBuf>,
    #[arg(long)]
    out_gains: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Edge confidences (`source,target,gain`); without it AUPRC ranks only the predicted edges.
    #[arg(long)]
    gains: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides or replaces the config's system.
    #[arg(long)]
    system: Option<SystemKind>,
    /// Seeds as a list `0,1,2` or a range `0..10`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    irregularity: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidArgument(format!("invalid seed list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn gen(args: GenArgs) -> Result<()> {
    let proto = args.system.protocol();
    let dim = args.system.fixed_dim().or(args.dim).unwrap_or(proto.dim);
    let tl = make_timeline(
        args.t_start,
        args.t_end.unwrap_or(proto.t_end),
        args.dt.unwrap_or(proto.dt),
        args.irregularity,
        args.seed,
    )?;
    let noise = NoiseSpec::new(args.noise_sigma.unwrap_or(proto.noise_sigma))?;
    let run = generate(args.system, dim, &tl, noise, args.seed)?;
    io::write_trajectory_csv(&run.trajectory, &args.out)?;
    if let Some(p) = &args.truth_out {
        io::write_graph_json(&run.truth, p)?;
    }
    eprintln!(
        "{}: {} samples x {} variables, {} true edges",
        args.system,
        tl.len(),
        dim,
        run.truth.edge_count()
    );
    Ok(())
}

fn discover_cmd(args: DiscoverArgs) -> Result<()> {
    let traj = io::ingest_csv(&args.input)?;
    let score = ScoreConfig { kernel: args.kernel, order: args.order, restarts: args.restarts, seed: args.seed, ..ScoreConfig::default() };
    let search = SearchConfig {
        significance_alpha: args.alpha,
        allow_self_loops: matches!(args.self_loops, Toggle::On),
        max_parents: args.max_parents,
        prefilter: !args.no_prefilter,
    };
    let found = discover(&traj, &score, &search)?;
    let names = traj.names();
    for ((i, j), g) in &found.final_gains {
        println!("{} -> {}\t{g:.3}", names[*i], names[*j]);
    }
    eprintln!("{} edges, {:.1} bits, {} models fitted", found.graph.edge_count(), found.total_bits, found.models_fitted);
    if let Some(p) = &args.out_graph {
        io::write_graph_json(&found.graph, p)?;
    }
    if let Some(p) = &args.out_gains {
        io::write_gains_csv(&found.final_gains, p)?;
    }
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> Result<()> {
    let pred = io::read_graph_json(&args.pred)?;
    let truth = io::read_graph_json(&args.truth)?;
    let scored = match &args.gains {
        Some(p) => io::read_gains_csv(p)?,
        None => pred.edges().into_iter().map(|e| (e, 1.0)).collect(),
    };
    let report = evaluate(&pred, &truth, &scored)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(p) => std::fs::write(p, format!("{json}\n"))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn experiment_cmd(args: ExperimentArgs) -> Result<bool> {
    let mut cfg = match (&args.config, args.system) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(system)) => ExperimentConfig::new(system, vec![0]),
        (None, None) => return Err(Error::Config("either --config or --system is required".into())),
    };
    if let Some(system) = args.system {
        cfg.system = system;
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(b) = args.irregularity {
        cfg.irregularity = b;
    }
    if let Some(o) = args.order {
        cfg.integrator_order = o;
    }
    if let Some(k) = args.kernel {
        cfg.kernel = k;
    }
    if let Some(d) = args.out_dir {
        cfg.output_dir = Some(d);
    }
    let report = run_experiment(&cfg)?;
    println!("{:<22}{:>12}{:>12}{:>7}", "metric", "mean", "std", "n");
    for (name, a) in &report.aggregates {
        println!("{name:<22}{:>12.4}{:>12.4}{:>7}", a.mean, a.std, a.count);
    }
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("seed {} failed: {}", row.seed, row.error.as_deref().unwrap_or(""));
    }
    Ok(!report.all_failed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Discover(a) => discover_cmd(a).map(|_| true),
        Command::Eval(a) => eval_cmd(a).map(|_| true),
        Command::Experiment(a) => experiment_cmd(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: every seed failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
