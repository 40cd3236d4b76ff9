//! Batch front-end: parse a JSON experiment spec, run it, write reports.
//!
//! Exit codes: 0 success, 2 validation error (no partial output), 3
//! optimizer non-convergence (reports still written).

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use tannaka_metrics::experiment::{
    list_builtins, run, Command, ExperimentSpec, OutputFormat,
};

#[derive(Parser)]
#[command(
    name = "tannaka-metrics",
    version = tannaka_metrics::VERSION,
    about = "Dual length functions, representation distances, and stability checks",
    long_about = "Runs JSON experiment specs and writes deterministic JSON/CSV reports.\n\
                  All randomness flows from the spec seed through ChaCha8 streams, so\n\
                  reports are byte-identical for identical spec + seed, independent of\n\
                  the thread count."
)]
struct Cli {
    /// Worker threads (falls back to TANNAKA_METRICS_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Execute whatever command the spec declares
    Run(RunArgs),
    /// Print available group families, metrics, rep families, and defaults
    ListBuiltins,
    /// Dual + double-dual lengths (spec must declare "command": "dual")
    Dual(RunArgs),
    /// Stability verdict for a length function
    Stability(RunArgs),
    /// Lattice or circle closed-form duals
    Pontryagin(RunArgs),
    /// Sampled torus-quotient validation
    Torus(RunArgs),
    /// Distance between two representations
    Dreps(RunArgs),
    /// Lipschitz-seminorm comparison of two representation algebras
    Lipnorm(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment spec
    #[arg(long)]
    spec: PathBuf,
    /// Directory receiving report.json / report.csv
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Which report files to write
    #[arg(long, default_value = "both")]
    format: OutputFormat,
    /// Override the seed declared in the spec
    #[arg(long)]
    seed: Option<u64>,
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("TANNAKA_METRICS_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("TANNAKA_METRICS_THREADS must be a positive integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn execute(args: &RunArgs, expect: Option<Command>) -> i32 {
    let text = match std::fs::read_to_string(&args.spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.spec.display());
            return 2;
        }
    };
    let mut spec = match ExperimentSpec::from_json(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(cmd) = expect {
        if spec.command != cmd {
            eprintln!(
                "error: the spec declares command \"{}\" but the \"{cmd}\" subcommand was invoked",
                spec.command
            );
            return 2;
        }
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    match run(&spec, &args.out, args.format) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.converged {
                0
            } else {
                eprintln!(
                    "warning: the optimizer stopped on its iteration cap; \
                     reports were written, treat the value as an upper bound"
                );
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match threads_from_env() {
            Ok(t) => t,
            Err(msg) => {
                eprintln!("error: {msg}");
                std::process::exit(2);
            }
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            std::process::exit(2);
        }
    }
    let code = match &cli.command {
        CliCommand::Run(args) => execute(args, None),
        CliCommand::ListBuiltins => {
            print!("{}", list_builtins());
            0
        }
        CliCommand::Dual(args) => execute(args, Some(Command::Dual)),
        CliCommand::Stability(args) => execute(args, Some(Command::Stability)),
        CliCommand::Pontryagin(args) => execute(args, Some(Command::Pontryagin)),
        CliCommand::Torus(args) => execute(args, Some(Command::Torus)),
        CliCommand::Dreps(args) => execute(args, Some(Command::Dreps)),
        CliCommand::Lipnorm(args) => execute(args, Some(Command::Lipnorm)),
    };
    std::process::exit(code);
}
