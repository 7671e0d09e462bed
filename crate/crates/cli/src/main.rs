//! `dynnet`: simulate, search, construct, verify and analyze dissemination
//! under oblivious message adversaries.
//!
//! Exit codes: 0 success, 1 a check failed or a run-time error, 2 invalid
//! input, 3 the objective was not reached.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dynnet_core::search::{GreedyPolicy, DEFAULT_MEM_CAP};
use dynnet_core::Model;

#[derive(Parser)]
#[command(name = "dynnet", version, about = "Dissemination in dynamic networks under oblivious message adversaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ObjectiveArg {
    Broadcast,
    Cover,
    Kbroadcast,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Certificate {
    RoundsGraph,
    StrictSets,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolicyArg {
    MinNewEdges,
    MinMaxOutRow,
}

impl From<PolicyArg> for GreedyPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::MinNewEdges => GreedyPolicy::MinNewEdges,
            PolicyArg::MinMaxOutRow => GreedyPolicy::MinMaxOutRow,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a sequence file and report when the objective is reached.
    Simulate {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        /// Objective parameter; defaults to the file's k.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "table")]
        json: bool,
        #[arg(long)]
        table: bool,
    },
    /// Exact worst-case objective time by exhaustive search.
    Search {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Defaults to the model's natural objective.
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        #[arg(long)]
        threads: Option<usize>,
        /// Memo budget in bytes.
        #[arg(long, env = "DYNNET_MEM_CAP", default_value_t = DEFAULT_MEM_CAP)]
        mem_cap: usize,
        /// Search past the default size guards.
        #[arg(long)]
        allow_large: bool,
    },
    /// Write a lower-bound schedule as a sequence file.
    Construct {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedy adversary sequence written as a sequence file.
    Greedy {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "min-new-edges")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check bounds, random sequences, constructions and certificates on a grid.
    Verify {
        #[arg(long, default_value = "n=3..20,k=1..3")]
        grid: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Build and check a certificate on a sequence file.
    Analyze {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_enum)]
        certificate: Certificate,
        /// Comma-separated process ids to avoid (rounds graph).
        #[arg(long, value_delimiter = ',')]
        avoid: Vec<usize>,
        /// Cover size for the strict sets; defaults to the file's k.
        #[arg(long)]
        k: Option<usize>,
        /// Final round t'; defaults to the sequence length.
        #[arg(long)]
        tprime: Option<usize>,
        /// Also write the certificate graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print the bound formulas as CSV.
    Bounds {
        #[arg(long, default_value = "n=2..20,k=1..3")]
        grid: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { seq, objective, k, json, table: _ } => commands::simulate(&seq, objective, k, json),
        Command::Search { model, n, k, objective, threads, mem_cap, allow_large } => {
            commands::search(model, n, k, objective, threads, mem_cap, allow_large)
        }
        Command::Construct { model, n, k, out } => commands::construct(model, n, k, &out),
        Command::Greedy { model, n, k, policy, horizon, seed, out } => {
            commands::greedy(model, n, k, policy.into(), horizon, seed, &out)
        }
        Command::Verify { grid, samples, seed, threads, json } => commands::verify(&grid, samples, seed, threads, json),
        Command::Analyze { seq, certificate, avoid, k, tprime, dot } => {
            commands::analyze(&seq, certificate, &avoid, k, tprime, dot.as_deref())
        }
        Command::Bounds { grid } => commands::bounds(&grid),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
