//! `cqcount`: count answers to extended conjunctive queries.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid
//! query/database/parameters, 4 a budget or limit was exceeded.

mod commands;
mod limits;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cqcount::reduction::HomBackend;

use crate::report::Method;

#[derive(Parser, Debug)]
#[command(name = "cqcount", version, about = "Count answers to conjunctive queries with negations and disequalities")]
struct Cli {
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count the answers of a query on a database.
    Count(CountArgs),
    /// Report width measures of a query's hypergraph.
    Analyze(AnalyzeArgs),
    /// Write generated query and database files.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Bruteforce,
    TdDp,
}

impl From<Backend> for HomBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Bruteforce => HomBackend::Bruteforce,
            Backend::TdDp => HomBackend::TdDp,
        }
    }
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: Method,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Required for approximate methods.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "td-dp")]
    pub hom_backend: Backend,
    /// Assignments the exact method may enumerate.
    #[arg(long)]
    pub brute_force_limit: Option<u128>,
    /// Largest cap on simulated edge-free calls for approximate methods.
    #[arg(long)]
    pub max_oracle_calls: Option<u64>,
    /// Cap on |Sol| per bag for the fhw method.
    #[arg(long)]
    pub max_bag_solutions: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub out: OutFormat,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub query: PathBuf,
    /// Comma-separated subset of tw, fhw, rho; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub measures: Vec<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub out: OutFormat,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// Hamiltonian-path query for a graph (answers = directed n-vertex paths).
    Hampath {
        /// Graph file: one `u v` edge or `u` vertex per line.
        #[arg(long)]
        graph: PathBuf,
        /// Path length in vertices; defaults to the number of vertices.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Locally injective homomorphisms from a pattern graph to a target graph.
    Lihom {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Seeded random query and database.
    Random {
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 3)]
        atoms: usize,
        #[arg(long, default_value_t = 4)]
        domain: usize,
        #[arg(long, default_value_t = 0.2)]
        p_neg: f64,
        #[arg(long, default_value_t = 0.3)]
        p_diseq: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        free: Option<usize>,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 2)]
        relations: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Parameter problems found by the frontend itself.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<cqcount::Error>() {
            use cqcount::Error as E;
            return match e {
                E::Parse { .. } | E::Json(_) => 2,
                E::LimitExceeded { .. } | E::BudgetExceeded { .. } => 4,
                _ => 3,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(args) => commands::count(&args, cli.verbose),
        Command::Analyze(args) => commands::analyze(&args, cli.verbose),
        Command::Gen { kind } => commands::gen(&kind, cli.verbose),
    };
    match result {
        Ok(doc) => {
            println!("{doc}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
