use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entperc::disorder::{assign, DisorderSpec};
use entperc::engine::{sample_and_select, HeuristicParams, Provenance};
use entperc::experiment::{
    emit, format_thresholds, render, run_disorder_sweep, run_thresholds, run_uniform_sweep, ExperimentConfig,
    ExperimentError, OutputFormat, SweepKind, ThresholdRow,
};
use entperc::network::{build_topology, read_network, write_network, QuantumNetwork, TopologyKind, TopologySpec};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_SELF_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "entperc", version, about = "Entanglement percolation sweeps on planar quantum networks")]
struct Cli {
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; overrides the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Samples per pair; overrides the config and resets the schedule.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long = "max-improve-iters", global = true)]
    max_improve_iters: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform Schmidt value sweep.
    Sweep { config: PathBuf },
    /// Sweep over mean Schmidt values with quenched disorder.
    DisorderSweep { config: PathBuf },
    /// Percolation thresholds of the standard strategies.
    Thresholds,
    /// Print a lattice in the network file format.
    Topology(LatticeArgs),
    /// One source-target run with its full operation log.
    Pair(PairArgs),
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long, value_parser = clap::value_parser!(TopologyKind))]
    kind: TopologyKind,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Schmidt value of every link.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
}

#[derive(Args)]
struct PairArgs {
    /// Network file; otherwise a lattice is built from --kind, --rows, --cols.
    #[arg(long, conflicts_with_all = ["kind", "rows", "cols"])]
    network: Option<PathBuf>,
    #[arg(long)]
    kind: Option<TopologyKind>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Uniform Schmidt value for a generated lattice.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long)]
    source: usize,
    #[arg(long)]
    target: usize,
    /// Also print every sample.
    #[arg(long)]
    verbose: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let result = match &cli.command {
        Command::Sweep { config } => sweep(&cli, config, SweepKind::Uniform),
        Command::DisorderSweep { config } => sweep(&cli, config, SweepKind::Disorder),
        Command::Thresholds => return thresholds(),
        Command::Topology(args) => topology(&cli, args),
        Command::Pair(args) => pair(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn heuristics(cli: &Cli, mut p: HeuristicParams) -> HeuristicParams {
    if let Some(n) = cli.samples {
        let improve = p.max_improve_iterations;
        p = HeuristicParams::with_samples(n);
        p.max_improve_iterations = improve;
    }
    if let Some(k) = cli.max_improve_iters {
        p.max_improve_iterations = k;
    }
    p
}

fn sweep(cli: &Cli, path: &std::path::Path, kind: SweepKind) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.heuristics.samples = n;
        cfg.heuristics.slack_schedule = None;
        cfg.heuristics.distance_relax_schedule = None;
    }
    if let Some(k) = cli.max_improve_iters {
        cfg.heuristics.max_improve_iterations = k;
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let output = cli.output.clone().or(cfg.output.clone());
    let out = match kind {
        SweepKind::Uniform => run_uniform_sweep(&cfg)?,
        SweepKind::Disorder => run_disorder_sweep(&cfg)?,
    };
    match output {
        Some(p) => {
            let agg = emit(&out, cli.format, &p)?;
            eprintln!("wrote {} records to {} and aggregates to {}", out.records.len(), p.display(), agg.display());
        }
        None => {
            let (records, _) = render(&out, cli.format);
            print!("{}", String::from_utf8_lossy(&records));
        }
    }
    Ok(())
}

fn thresholds() -> ExitCode {
    let rows = run_thresholds();
    print!("{}", format_thresholds(&rows));
    if rows.iter().all(ThresholdRow::ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELF_CHECK)
    }
}

fn lattice(kind: TopologyKind, rows: usize, cols: usize, lambda: f64) -> Result<QuantumNetwork, Failure> {
    let mut net = build_topology(&TopologySpec { kind, rows, cols }).map_err(|e| Failure::Config(e.to_string()))?;
    assign(&mut net, &DisorderSpec::uniform(lambda)).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(net)
}

fn write_or_print(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn topology(cli: &Cli, a: &LatticeArgs) -> Result<(), Failure> {
    let net = lattice(a.kind, a.rows, a.cols, a.lambda)?;
    eprintln!("{} {}x{}: {} nodes, {} links", a.kind, a.rows, a.cols, net.node_count(), net.original_count());
    write_or_print(cli, &write_network(&net))
}

fn pair(cli: &Cli, a: &PairArgs) -> Result<(), Failure> {
    let net = match (&a.network, a.kind, a.rows, a.cols) {
        (Some(path), ..) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            read_network(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        (None, Some(kind), Some(rows), Some(cols)) => lattice(kind, rows, cols, a.lambda)?,
        _ => return Err(Failure::Config("give --network, or all of --kind, --rows and --cols".into())),
    };
    let params = heuristics(cli, HeuristicParams::default());
    params.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let report = sample_and_select(&net, a.source, a.target, &params, cli.seed.unwrap_or(0))
        .map_err(|e| Failure::Runtime(e.to_string()))?;

    let mut out = String::new();
    if a.verbose {
        for s in &report.samples {
            out.push_str(&format!(
                "sample {:?}: path {:?} lambda {} destroyed {}{}\n",
                s.provenance,
                s.path,
                s.final_lambda,
                s.destroyed,
                if s.failed() { " (failed)" } else { "" }
            ));
        }
    }
    let sel = &report.selected;
    let from = match sel.provenance {
        Provenance::Sample(i) => format!("sample {i}"),
        Provenance::Combined(i, j) => format!("distillation of samples {i} and {j}"),
    };
    out.push_str(&format!("selected: {from}\n"));
    out.push_str(&format!("path: {:?}\n", sel.path));
    out.push_str(&format!("final lambda: {}\n", sel.final_lambda));
    out.push_str(&format!("entanglement: {}\n", sel.entanglement()));
    out.push_str(&format!("destroyed: {}\n", sel.destroyed));
    out.push_str("operations:\n");
    for op in &sel.log {
        match cli.format {
            OutputFormat::JsonLines => out.push_str(&serde_json::to_string(op).expect("plain data")),
            OutputFormat::Csv => out.push_str(&format!("  {op:?}")),
        }
        out.push('\n');
    }
    write_or_print(cli, &out)
}
