//! Hourly backtest loop.
//!
//! All of an hour's volume is assumed to trade at the closing price, and the
//! simulated strategy is assumed small against pool liquidity, so a position
//! with active liquidity `L` earns `V_t · fee_rate · L / L_t` for the hour.
//!
//! Two ledgers run side by side. The plain ledger keeps fee income aside in
//! token Y; it yields the `fees` and `value` metrics. The compounding ledger
//! reinvests each hour's fees into its positions immediately; it yields
//! `total`. Per bar, in order: accrue fees against the pre-bar state, mark to
//! market at the close, compound (second ledger only), apply the strategy's
//! close handler to both ledgers. The first bar only initializes.

use crate::error::{Error, Result};
use crate::strategies::{RangePolicy, StrategyConfig, StrategyState};

/// One hour of pool data, sampled at the end of the hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyBar {
    /// Unix seconds, UTC.
    pub timestamp: i64,
    /// Closing price, token Y per token X.
    pub price: f64,
    /// Volume traded over the hour, in token Y.
    pub volume: f64,
    /// Liquidity active at the closing price (v3) or total pool liquidity (v2).
    pub pool_liquidity: f64,
    /// Total value locked, in token Y.
    pub tvl: Option<f64>,
}

impl HourlyBar {
    pub fn new(timestamp: i64, price: f64, volume: f64, pool_liquidity: f64) -> Self {
        Self {
            timestamp,
            price,
            volume,
            pool_liquidity,
            tvl: None,
        }
    }

    pub fn with_tvl(mut self, tvl: f64) -> Self {
        self.tvl = Some(tvl);
        self
    }

    /// Checks the field invariants, reporting `row` (1-based) on failure.
    pub fn validate(&self, row: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::data(Some(row), msg));
        if !(self.price.is_finite() && self.price > 0.0) {
            return fail(format!("price must be positive and finite, got {}", self.price));
        }
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return fail(format!("volume must be non-negative and finite, got {}", self.volume));
        }
        if !(self.pool_liquidity.is_finite() && self.pool_liquidity > 0.0) {
            return fail(format!(
                "pool_liquidity must be positive and finite, got {}",
                self.pool_liquidity
            ));
        }
        if let Some(tvl) = self.tvl {
            if !(tvl.is_finite() && tvl >= 0.0) {
                return fail(format!("tvl must be non-negative and finite, got {tvl}"));
            }
        }
        Ok(())
    }
}

/// Validates every bar and the strict timestamp ordering of the series.
pub fn validate_bars(bars: &[HourlyBar]) -> Result<()> {
    if bars.is_empty() {
        return Err(Error::usage("no bars to process"));
    }
    for (i, bar) in bars.iter().enumerate() {
        bar.validate(i + 1)?;
        if i > 0 && bar.timestamp <= bars[i - 1].timestamp {
            return Err(Error::data(
                Some(i + 1),
                format!(
                    "timestamps not increasing ({} follows {})",
                    bar.timestamp,
                    bars[i - 1].timestamp
                ),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacktestConfig {
    pub strategy: StrategyConfig,
    /// Pool fee tier, in `[0, 1)`.
    pub fee_rate: f64,
    /// Starting portfolio value in token Y; metrics are reported per unit of it.
    pub initial_value: f64,
    pub range_policy: RangePolicy,
}

impl BacktestConfig {
    pub fn new(strategy: StrategyConfig, fee_rate: f64) -> Self {
        Self {
            strategy,
            fee_rate,
            initial_value: 1.0,
            range_policy: RangePolicy::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_fee_rate(self.fee_rate)?;
        if !(self.initial_value.is_finite() && self.initial_value > 0.0) {
            return Err(Error::domain(format!(
                "initial value must be positive, got {}",
                self.initial_value
            )));
        }
        self.strategy.validate()
    }
}

pub(crate) fn check_fee_rate(fee_rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&fee_rate) {
        Ok(())
    } else {
        Err(Error::domain(format!("fee rate must lie in [0, 1), got {fee_rate}")))
    }
}

/// Per-bar record, normalized by the initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub timestamp: i64,
    /// Fee income of this bar (plain ledger).
    pub fee: f64,
    /// Plain-ledger position value at the close, fees excluded.
    pub value: f64,
    /// Compounding-ledger value at the close, this bar's fees included.
    pub total: f64,
    /// The strategy re-centred its liquidity at this close.
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    /// Sum of fee income per unit of initial value.
    pub fees: f64,
    /// Final position value without fees, per unit of initial value.
    pub value: f64,
    /// Final value with fees compounded, per unit of initial value.
    pub total: f64,
    /// Empty when the run was made without trajectory recording.
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Fee income (token Y) of `state` over `bar`.
pub fn accrue_fees(state: &StrategyState, bar: &HourlyBar, fee_rate: f64) -> f64 {
    let active = state.active_liquidity(bar.price).get();
    bar.volume * fee_rate * active / bar.pool_liquidity
}

/// Runs a backtest and records the per-bar trajectory.
pub fn run_backtest(config: &BacktestConfig, bars: &[HourlyBar]) -> Result<BacktestResult> {
    simulate(config, bars, true)
}

/// Same as [`run_backtest`] without the trajectory, for bulk sweeps.
pub fn run_backtest_summary(config: &BacktestConfig, bars: &[HourlyBar]) -> Result<BacktestResult> {
    simulate(config, bars, false)
}

fn simulate(config: &BacktestConfig, bars: &[HourlyBar], record: bool) -> Result<BacktestResult> {
    config.validate()?;
    validate_bars(bars)?;

    let init = config.initial_value;
    let first = &bars[0];
    let mut plain = StrategyState::initialize_with_policy(
        config.strategy,
        config.range_policy,
        first.price,
        init,
    )?;
    let mut compounding = plain.clone();

    let mut trajectory = Vec::with_capacity(if record { bars.len() } else { 0 });
    if record {
        trajectory.push(TrajectoryPoint {
            timestamp: first.timestamp,
            fee: 0.0,
            value: plain.mark_to_market(first.price) / init,
            total: compounding.mark_to_market(first.price) / init,
            reset: false,
        });
    }

    let mut fee_sum = 0.0;
    for bar in &bars[1..] {
        let p = bar.price;
        let fee = accrue_fees(&plain, bar, config.fee_rate);
        let fee_compounding = accrue_fees(&compounding, bar, config.fee_rate);

        let value = plain.mark_to_market(p);
        let value_compounding = compounding.mark_to_market(p);
        let total = value_compounding + fee_compounding;
        if value_compounding > 0.0 {
            compounding = compounding.scaled(total / value_compounding);
        }

        let next = plain.on_close(p)?;
        let reset = next.reset_range() != plain.reset_range();
        plain = next;
        compounding = compounding.on_close(p)?;

        fee_sum += fee;
        if record {
            trajectory.push(TrajectoryPoint {
                timestamp: bar.timestamp,
                fee: fee / init,
                value: value / init,
                total: total / init,
                reset,
            });
        }
    }

    let last = bars[bars.len() - 1].price;
    Ok(BacktestResult {
        fees: fee_sum / init,
        value: plain.mark_to_market(last) / init,
        total: compounding.mark_to_market(last) / init,
        trajectory,
    })
}

/// Per-bar `(timestamp, fee, value, total)` rows in input order.
pub fn replay_trajectory(result: &BacktestResult) -> Vec<(i64, f64, f64, f64)> {
    result
        .trajectory
        .iter()
        .map(|t| (t.timestamp, t.fee, t.value, t.total))
        .collect()
}
