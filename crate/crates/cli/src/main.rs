//! `clbacktest` command-line frontend.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error.

mod commands;
mod worked_examples;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "clbacktest", version, about = "Backtest concentrated-liquidity LP strategies on hourly pool data")]
struct Cli {
    /// Print timing information to stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one strategy over a data file and print fees, value and total.
    Backtest(BacktestArgs),
    /// Run a parameter grid and print the ranked performance table.
    Sweep(SweepArgs),
    /// Daily fee returns (fee volume over TVL) per UTC day.
    DailyReturns(DailyReturnsArgs),
    /// Recompute the reference worked examples and check them.
    PaperExamples,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Hourly CSV: timestamp,price,volume,pool_liquidity,tvl
    #[arg(long)]
    data: PathBuf,

    /// Pool fee tier as a decimal, e.g. 0.003.
    #[arg(long)]
    fee: f64,

    /// First UTC day to include (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    from: Option<NaiveDate>,

    /// Last UTC day to include (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    to: Option<NaiveDate>,
}

#[derive(Args, Debug)]
struct BacktestArgs {
    #[command(flatten)]
    data: DataArgs,

    /// nolp | passive | fixed:a=<A> | reset:a=<A>,r=<R>
    #[arg(long)]
    strategy: String,

    #[arg(long, value_enum, default_value_t = PairClassArg::Volatile)]
    pair_class: PairClassArg,

    /// Snap range bounds to usable ticks of the pair's tick spacing.
    #[arg(long)]
    snap_ticks: bool,

    /// Write the per-bar trajectory CSV here.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,

    #[arg(long, value_enum, default_value_t = KindArg::Both)]
    kind: KindArg,

    #[arg(long, value_enum, default_value_t = PairClassArg::Volatile)]
    pair_class: PairClassArg,

    /// Grid override `min,max,step`. Given once it applies to a and r; given
    /// twice the second occurrence applies to r.
    #[arg(long, num_args = 1, action = clap::ArgAction::Append, allow_hyphen_values = true)]
    grid: Vec<String>,

    #[arg(long)]
    snap_ticks: bool,

    /// Write every grid result as CSV here.
    #[arg(long)]
    dump: Option<PathBuf>,

    /// markdown | csv
    #[arg(long, default_value = "markdown")]
    format: String,

    /// Worker threads (defaults to available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct DailyReturnsArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PairClassArg {
    Volatile,
    Stable,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Fixed,
    Reset,
    Both,
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("expected YYYY-MM-DD: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match cli.command {
        Command::Backtest(args) => commands::backtest(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::DailyReturns(args) => commands::daily_returns(args),
        Command::PaperExamples => worked_examples::run(),
    };
    if cli.verbose {
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    match outcome {
        Ok(report) => {
            print!("{}", report.text);
            ExitCode::from(report.code)
        }
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
