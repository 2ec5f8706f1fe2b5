use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clbacktest::dataio::{average_daily_return, daily_fee_returns, load_bars_from_path};
use clbacktest::engine::{run_backtest, BacktestConfig, BacktestResult};
use clbacktest::sweep::{
    build_grid, rank_results, render_report, run_baselines, run_sweep, write_results_csv,
    GridAxis, GridSpec, PairClass, ReportFormat,
};
use clbacktest::{BarSeries, Error, RangePolicy, StrategyConfig, StrategyKind};

use crate::{BacktestArgs, DailyReturnsArgs, DataArgs, KindArg, PairClassArg, SweepArgs};

pub const EXIT_DATA: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub struct Report {
    pub text: String,
    pub code: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, code: 0 }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = if err.is_data_error() { EXIT_DATA } else { EXIT_USAGE };
        CliError { code, message: err.to_string() }
    }
}

fn output_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_DATA, message: format!("cannot write {}: {err}", path.display()) }
}

impl From<PairClassArg> for PairClass {
    fn from(arg: PairClassArg) -> Self {
        match arg {
            PairClassArg::Volatile => PairClass::Volatile,
            PairClassArg::Stable => PairClass::Stable,
        }
    }
}

fn load(args: &DataArgs, pair_class: PairClass) -> Result<BarSeries, CliError> {
    if !(0.0..1.0).contains(&args.fee) {
        return Err(CliError::usage(format!("--fee must lie in [0, 1), got {}", args.fee)));
    }
    let series = load_bars_from_path(&args.data, pair_class.profile(), args.fee)?;
    if args.from.is_some() || args.to.is_some() {
        Ok(series.window(args.from, args.to)?)
    } else {
        Ok(series)
    }
}

fn range_policy(snap: bool, pair_class: PairClass) -> RangePolicy {
    if snap {
        RangePolicy::SnapToTicks { spacing: pair_class.profile().tick_spacing }
    } else {
        RangePolicy::Exact
    }
}

fn write_trajectory(path: &Path, result: &BacktestResult) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "timestamp,fee,value,total,reset")?;
        for t in &result.trajectory {
            writeln!(out, "{},{},{},{},{}", t.timestamp, t.fee, t.value, t.total, u8::from(t.reset))?;
        }
        out.flush()
    };
    write().map_err(|e| output_error(path, e))
}

pub fn backtest(args: BacktestArgs) -> Result<Report, CliError> {
    let strategy: StrategyConfig = args
        .strategy
        .parse()
        .map_err(|e: Error| CliError::usage(format!("--strategy: {e}")))?;
    let pair_class = PairClass::from(args.pair_class);
    let series = load(&args.data, pair_class)?;

    let config = BacktestConfig {
        range_policy: range_policy(args.snap_ticks, pair_class),
        ..BacktestConfig::new(strategy, series.fee_rate)
    };
    let result = run_backtest(&config, &series.bars)?;
    if let Some(path) = &args.trajectory {
        write_trajectory(path, &result)?;
    }

    let resets = result.trajectory.iter().filter(|t| t.reset).count();
    let mut text = String::new();
    let _ = writeln!(text, "strategy: {strategy}");
    let _ = writeln!(text, "bars:     {}", series.bars.len());
    if strategy.kind() == StrategyKind::Reset {
        let _ = writeln!(text, "resets:   {resets}");
    }
    let _ = writeln!(text, "fees:     {}", result.fees);
    let _ = writeln!(text, "value:    {}", result.value);
    let _ = writeln!(text, "total:    {}", result.total);
    Ok(Report::ok(text))
}

fn grid_overrides(grid: &[String]) -> Result<(Option<GridAxis>, Option<GridAxis>), CliError> {
    let parse = |s: &String| s.parse::<GridAxis>().map_err(|e| CliError::usage(format!("--grid: {e}")));
    match grid {
        [] => Ok((None, None)),
        [a] => Ok((Some(parse(a)?), None)),
        [a, r] => Ok((Some(parse(a)?), Some(parse(r)?))),
        _ => Err(CliError::usage("--grid may be given at most twice (a, then r)")),
    }
}

pub fn sweep(args: SweepArgs) -> Result<Report, CliError> {
    let format: ReportFormat = args.format.parse()?;
    if args.jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let (a_axis, r_axis) = grid_overrides(&args.grid)?;
    let kinds: &[StrategyKind] = match args.kind {
        KindArg::Fixed => &[StrategyKind::Fixed],
        KindArg::Reset => &[StrategyKind::Reset],
        KindArg::Both => &[StrategyKind::Fixed, StrategyKind::Reset],
    };
    if r_axis.is_some() && args.kind == KindArg::Fixed {
        return Err(CliError::usage("a second --grid (for r) only applies to reset sweeps"));
    }
    let pair_class = PairClass::from(args.pair_class);

    let mut grids = Vec::new();
    for &kind in kinds {
        let spec = GridSpec {
            a_override: a_axis,
            r_override: if kind == StrategyKind::Reset { r_axis } else { None },
            ..GridSpec::new(pair_class, kind)
        };
        grids.push(build_grid(&spec)?);
    }

    let series = load(&args.data, pair_class)?;
    let policy = range_policy(args.snap_ticks, pair_class);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("--jobs: {e}")))?;
    let baselines = run_baselines(&series)?;
    let mut summaries = Vec::new();
    for grid in &grids {
        let results = pool.install(|| run_sweep(grid, &series, policy))?;
        summaries.push(rank_results(results, baselines.clone())?);
    }

    if let Some(path) = &args.dump {
        let all: Vec<_> = summaries.iter().flat_map(|s| s.all_results.iter().cloned()).collect();
        let file = File::create(path).map_err(|e| output_error(path, e))?;
        write_results_csv(&all, BufWriter::new(file)).map_err(|e| output_error(path, e))?;
    }
    Ok(Report::ok(render_report(&summaries, pair_class, format)?))
}

pub fn daily_returns(args: DailyReturnsArgs) -> Result<Report, CliError> {
    let series = load(&args.data, PairClass::Volatile)?;
    let points = daily_fee_returns(&series)?;
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return Err(CliError::usage("no days in the selected window"));
    };
    let mean = average_daily_return(&points, first.date, last.date)?;

    let mut text = String::from("date,lp_return\n");
    for p in &points {
        let _ = writeln!(text, "{},{}", p.date, p.lp_return);
    }
    let _ = writeln!(text, "average,{mean}");
    Ok(Report::ok(text))
}
