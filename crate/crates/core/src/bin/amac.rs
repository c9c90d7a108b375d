use std::path::PathBuf;
use std::process::ExitCode;

use amac_core::cli::{run, ExperimentConfig, TaskKind};
use clap::{Args, Parser, Subcommand};

/// Capacity regions and coding experiments for asynchronous multiple-access channels.
#[derive(Parser)]
#[command(name = "amac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a region boundary to CSV.
    Region(RunArgs),
    /// Monte Carlo error rates of a coding scheme.
    Simulate(RunArgs),
    /// Rate-split an edge point.
    Split(RunArgs),
    /// Evaluate the converse bound on generated codebooks.
    Converse(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Replaces the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Region(a) => (TaskKind::Region, a),
        Command::Simulate(a) => (TaskKind::Simulate, a),
        Command::Split(a) => (TaskKind::Split, a),
        Command::Converse(a) => (TaskKind::Converse, a),
    };
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("amac: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = ExperimentConfig::load(&args.config).and_then(|(mut cfg, base)| {
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        run(&cfg, &base, Some(kind), &args.out)
    });
    match result {
        Ok(summary) => {
            println!("{}", summary.json.display());
            println!("{}", summary.csv.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("amac: {e}");
            ExitCode::FAILURE
        }
    }
}
