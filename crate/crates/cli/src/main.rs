//! `dsess`: check, run, trace and analyze session programs.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "dsess", version, about = "Multiparty session programs: type checking and a pool interpreter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program; diagnostics go to standard error.
    Check {
        file: PathBuf,
        #[command(flatten)]
        check: CheckFlags,
    },
    /// Run a checked program and print its outcome.
    Run(RunArgs),
    /// Run and print one record per pool step.
    Trace(RunArgs),
    /// Run and print the reducibility analysis of every pool.
    Analyze(RunArgs),
}

#[derive(Args, Clone)]
pub struct CheckFlags {
    /// Turn undecided guards into run-time assertions.
    #[arg(long)]
    pub assert_runtime: bool,
    /// Assignment budget for each solver query.
    #[arg(long)]
    pub solver_budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub check: CheckFlags,
    /// Random scheduling with this seed; round-robin when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    /// Assert consistency, pool typing and reducibility before every step.
    #[arg(long)]
    pub checked: bool,
    /// Run without tracking endpoint types.
    #[arg(long)]
    pub erase_proofs: bool,
    /// Skip type checking. `builtin:crossed-deadlock` then names a pool
    /// that cannot be written as a well-typed program. For tests.
    #[arg(long, hide = true)]
    pub unsafe_backdoor: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Records,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file, check } => commands::check(&file, &check),
        Command::Run(args) => commands::run(&args, commands::Mode::Outcome),
        Command::Trace(args) => commands::run(&args, commands::Mode::Trace),
        Command::Analyze(args) => commands::run(&args, commands::Mode::Analyze),
    };
    ExitCode::from(code)
}
