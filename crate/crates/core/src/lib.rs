//! Backtesting engine for concentrated-liquidity market-making strategies on
//! constant-product AMM pools.
//!
//! - [`clmath`]: tick geometry, real/virtual reserves, position value, liquidity sizing.
//! - [`strategies`]: No-LP, Passive, Fixed(a) and Reset(a, r) state machines.
//! - [`engine`]: the hourly fee-accrual loop producing `fees`, `value`, `total`.
//! - [`dataio`]: CSV ingestion and daily fee-return statistics.
//! - [`sweep`]: parameter grids, batch runs, ranking and reports.

pub mod clmath;
pub mod dataio;
pub mod engine;
pub mod error;
pub mod strategies;
pub mod sweep;

pub use clmath::{LiquidityAmount, PairProfile, PriceRange, TokenAmounts, VirtualReserves};
pub use dataio::{BarSeries, DailyReturnPoint};
pub use engine::{BacktestConfig, BacktestResult, HourlyBar, TrajectoryPoint};
pub use error::{Error, Result};
pub use strategies::{LiquidityPosition, RangePolicy, StrategyConfig, StrategyKind, StrategyState};
pub use sweep::{GridSpec, PairClass, ReportFormat, SweepEntry, SweepSummary};
