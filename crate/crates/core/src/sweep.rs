//! Parameter grids, batch backtests and ranking reports.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::clmath::PairProfile;
use crate::dataio::BarSeries;
use crate::engine::{run_backtest_summary, BacktestConfig, BacktestResult};
use crate::error::{Error, Result};
use crate::strategies::{RangePolicy, StrategyConfig, StrategyKind};

/// Grid points per axis above which a grid is refused.
const MAX_AXIS_POINTS: usize = 100_000;

/// Grid values are rounded to this many decimals so that e.g. `0.001·k`
/// lands exactly on the nearest double to the decimal literal.
const GRID_QUANTUM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    /// ETH-USDC-like pairs.
    Volatile,
    /// USDT-USDC-like pairs.
    Stable,
}

impl PairClass {
    /// Decimals used for metrics in rendered reports.
    pub fn report_decimals(self) -> usize {
        match self {
            PairClass::Volatile => 3,
            PairClass::Stable => 4,
        }
    }

    pub fn profile(self) -> PairProfile {
        match self {
            PairClass::Volatile => PairProfile::volatile(),
            PairClass::Stable => PairProfile::stable(),
        }
    }

    fn default_axis(self) -> GridAxis {
        match self {
            PairClass::Volatile => GridAxis { min: 0.006, max: 0.996, step: 0.006 },
            PairClass::Stable => GridAxis { min: 0.001, max: 0.5, step: 0.001 },
        }
    }

    fn default_reset_axis(self) -> GridAxis {
        match self {
            PairClass::Volatile => GridAxis { min: 0.006, max: 0.996, step: 0.006 },
            PairClass::Stable => GridAxis { min: 0.001, max: 0.05, step: 0.001 },
        }
    }
}

impl FromStr for PairClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "volatile" => Ok(PairClass::Volatile),
            "stable" => Ok(PairClass::Stable),
            other => Err(Error::usage(format!(
                "unknown pair class '{other}' (expected volatile or stable)"
            ))),
        }
    }
}

/// An inclusive arithmetic range `min, min+step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let axis = GridAxis { min, max, step };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(Error::usage("grid bounds must be finite"));
        }
        if !(self.min > 0.0 && self.step > 0.0 && self.min <= self.max) {
            return Err(Error::usage(format!(
                "grid must satisfy min > 0, step > 0, min <= max; got {},{},{}",
                self.min, self.max, self.step
            )));
        }
        if self.len() > MAX_AXIS_POINTS {
            return Err(Error::usage(format!(
                "grid axis has {} points, more than the limit of {MAX_AXIS_POINTS}",
                self.len()
            )));
        }
        Ok(())
    }

    fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| ((self.min + k as f64 * self.step) * GRID_QUANTUM).round() / GRID_QUANTUM)
            .collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// Parses `min,max,step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [min, max, step] = parts.as_slice() else {
            return Err(Error::usage(format!("grid '{s}' is not of the form min,max,step")));
        };
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::usage(format!("grid value '{v}' is not a decimal number")))
        };
        GridAxis::new(num(min)?, num(max)?, num(step)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub pair_class: PairClass,
    pub strategy_kind: StrategyKind,
    pub a_override: Option<GridAxis>,
    pub r_override: Option<GridAxis>,
}

impl GridSpec {
    pub fn new(pair_class: PairClass, strategy_kind: StrategyKind) -> Self {
        Self {
            pair_class,
            strategy_kind,
            a_override: None,
            r_override: None,
        }
    }
}

/// Deterministic ascending grid of strategy configurations.
///
/// Reset grids are the Cartesian product over `a` (outer) and `r` (inner).
pub fn build_grid(spec: &GridSpec) -> Result<Vec<StrategyConfig>> {
    for axis in spec.a_override.iter().chain(spec.r_override.iter()) {
        axis.validate()?;
    }
    match spec.strategy_kind {
        StrategyKind::Fixed => {
            if spec.r_override.is_some() {
                return Err(Error::usage("a Fixed grid has no r parameter"));
            }
            let a_axis = spec.a_override.unwrap_or(spec.pair_class.default_axis());
            Ok(a_axis.values().into_iter().map(|a| StrategyConfig::Fixed { a }).collect())
        }
        StrategyKind::Reset => {
            let default = spec.pair_class.default_reset_axis();
            let a_values = spec.a_override.unwrap_or(default).values();
            let r_values = spec.r_override.or(spec.a_override).unwrap_or(default).values();
            Ok(a_values
                .iter()
                .flat_map(|&a| r_values.iter().map(move |&r| StrategyConfig::Reset { a, r }))
                .collect())
        }
        other => Err(Error::usage(format!("no parameter grid exists for {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub config: StrategyConfig,
    pub result: BacktestResult,
}

/// Backtests every grid point on `series`, starting from a value of 1.
///
/// Runs on the current rayon pool; output order always matches `grid`.
pub fn run_sweep(
    grid: &[StrategyConfig],
    series: &BarSeries,
    policy: RangePolicy,
) -> Result<Vec<SweepEntry>> {
    if grid.is_empty() {
        return Err(Error::usage("empty parameter grid"));
    }
    grid.par_iter()
        .map(|&config| {
            let bt = BacktestConfig {
                range_policy: policy,
                ..BacktestConfig::new(config, series.fee_rate)
            };
            run_backtest_summary(&bt, &series.bars).map(|result| SweepEntry { config, result })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Baselines {
    pub nolp: BacktestResult,
    pub passive: BacktestResult,
}

pub fn run_baselines(series: &BarSeries) -> Result<Baselines> {
    let run = |strategy| {
        run_backtest_summary(&BacktestConfig::new(strategy, series.fee_rate), &series.bars)
    };
    Ok(Baselines {
        nolp: run(StrategyConfig::NoLp)?,
        passive: run(StrategyConfig::Passive)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub kind: StrategyKind,
    pub best_total: SweepEntry,
    pub worst_total: SweepEntry,
    pub best_fees: SweepEntry,
    pub baselines: Baselines,
    pub all_results: Vec<SweepEntry>,
}

fn param_order(x: &StrategyConfig, y: &StrategyConfig) -> Ordering {
    let key = |c: &StrategyConfig| (c.a().unwrap_or(0.0), c.r().unwrap_or(0.0));
    let (xa, xr) = key(x);
    let (ya, yr) = key(y);
    xa.total_cmp(&ya).then(xr.total_cmp(&yr))
}

/// Picks the extreme entries under `better`, breaking ties by smaller `a`, then `r`.
fn select(
    entries: &[SweepEntry],
    better: impl Fn(&BacktestResult, &BacktestResult) -> Ordering,
) -> &SweepEntry {
    entries
        .iter()
        .min_by(|x, y| better(&x.result, &y.result).then_with(|| param_order(&x.config, &y.config)))
        .expect("non-empty")
}

/// Best and worst by `total`, best by `fees`.
pub fn rank_results(results: Vec<SweepEntry>, baselines: Baselines) -> Result<SweepSummary> {
    let Some(first) = results.first() else {
        return Err(Error::usage("nothing to rank"));
    };
    let kind = first.config.kind();
    if results.iter().any(|e| e.config.kind() != kind) {
        return Err(Error::usage("cannot rank results of different strategy kinds together"));
    }
    let best_total = select(&results, |x, y| y.total.total_cmp(&x.total)).clone();
    let worst_total = select(&results, |x, y| x.total.total_cmp(&y.total)).clone();
    let best_fees = select(&results, |x, y| y.fees.total_cmp(&x.fees)).clone();
    Ok(SweepSummary {
        kind,
        best_total,
        worst_total,
        best_fees,
        baselines,
        all_results: results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "markdown-table" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::usage(format!(
                "unknown report format '{other}' (expected markdown or csv)"
            ))),
        }
    }
}

struct ReportRow<'a> {
    label: String,
    config: Option<StrategyConfig>,
    result: &'a BacktestResult,
}

/// Renders a percentage with at least one decimal, e.g. `0.006` as `0.6%`.
pub fn format_percent(v: f64) -> String {
    let s = format!("{:.4}", v * 100.0);
    let s = s.trim_end_matches('0');
    let s = if s.ends_with('.') { format!("{s}0") } else { s.to_string() };
    format!("{s}%")
}

fn parameters(config: Option<StrategyConfig>) -> String {
    match config {
        Some(StrategyConfig::Fixed { a }) => format_percent(a),
        Some(StrategyConfig::Reset { a, r }) => {
            format!("{}, {}", format_percent(a), format_percent(r))
        }
        _ => "-".to_string(),
    }
}

fn kind_title(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::NoLp => "No-LP",
        StrategyKind::Passive => "Passive",
        StrategyKind::Fixed => "Fixed",
        StrategyKind::Reset => "Reset",
    }
}

/// Renders the strategy-performance table.
///
/// Rows: No-LP, Passive, then best/worst by total and best by fees for each
/// summary (Fixed before Reset). Baselines come from the first summary.
pub fn render_report(
    summaries: &[SweepSummary],
    pair_class: PairClass,
    format: ReportFormat,
) -> Result<String> {
    let Some(first) = summaries.first() else {
        return Err(Error::usage("no sweep summaries to report"));
    };
    let mut ordered: Vec<&SweepSummary> = summaries.iter().collect();
    ordered.sort_by_key(|s| s.kind);

    let mut rows = vec![
        ReportRow { label: "No-LP".into(), config: None, result: &first.baselines.nolp },
        ReportRow { label: "Passive".into(), config: None, result: &first.baselines.passive },
    ];
    for s in ordered {
        let title = kind_title(s.kind);
        for (label, entry) in [
            (format!("Best {title} (total)"), &s.best_total),
            (format!("Worst {title} (total)"), &s.worst_total),
            (format!("Best {title} (fees)"), &s.best_fees),
        ] {
            rows.push(ReportRow { label, config: Some(entry.config), result: &entry.result });
        }
    }

    let d = pair_class.report_decimals();
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            out.push_str("| Strategy | Parameters | fees | value | total |\n");
            out.push_str("|---|---|---:|---:|---:|\n");
            for row in &rows {
                let r = row.result;
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.d$} | {:.d$} | {:.d$} |",
                    row.label,
                    parameters(row.config),
                    r.fees,
                    r.value,
                    r.total
                );
            }
        }
        ReportFormat::Csv => {
            out.push_str("strategy,a,r,fees,value,total\n");
            for row in &rows {
                let r = row.result;
                let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
                let config = row.config;
                let _ = writeln!(
                    out,
                    "{},{},{},{:.d$},{:.d$},{:.d$}",
                    row.label,
                    opt(config.and_then(|c| c.a())),
                    opt(config.and_then(|c| c.r())),
                    r.fees,
                    r.value,
                    r.total
                );
            }
        }
    }
    Ok(out)
}

/// Writes every sweep result as `kind,a,r,fees,value,total` at full precision.
pub fn write_results_csv<W: Write>(entries: &[SweepEntry], mut sink: W) -> Result<()> {
    writeln!(sink, "kind,a,r,fees,value,total")?;
    for e in entries {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            sink,
            "{},{},{},{},{},{}",
            e.config.kind(),
            opt(e.config.a()),
            opt(e.config.r()),
            e.result.fees,
            e.result.value,
            e.result.total
        )?;
    }
    sink.flush()?;
    Ok(())
}
