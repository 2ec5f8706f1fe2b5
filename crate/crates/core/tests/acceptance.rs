//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p clbacktest --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use clbacktest::clmath::{
    liquidity_from_equal_value, position_value, real_reserves, symmetric_range, LiquidityAmount,
    PriceRange,
};
use clbacktest::dataio::{average_daily_return, daily_fee_returns, load_bars, write_bars};
use clbacktest::engine::{run_backtest, BacktestConfig};
use clbacktest::strategies::{StrategyConfig, StrategyState};
use clbacktest::sweep::{build_grid, rank_results, run_baselines, run_sweep, GridSpec, PairClass};
use clbacktest::{BarSeries, Error, HourlyBar, PairProfile, RangePolicy, StrategyKind};
use common::{any_strategy, bar_fixture, oracle_metrics, rel};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(actual: f64, expected: f64, tol: f64, what: &str) -> Outcome {
    ensure!(
        rel(actual, expected) <= tol,
        "{what}: {actual} vs {expected} (relative error {:.3e} > {tol:e})",
        rel(actual, expected)
    );
    Ok(())
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn c1_liquidity_worked_example() -> Outcome {
    let l10 = liquidity_from_equal_value(2000.0, 0.10, 1000.0).map_err(|e| e.to_string())?;
    let l20 = liquidity_from_equal_value(2000.0, 0.20, 1000.0).map_err(|e| e.to_string())?;
    within(l10.get(), 240.3, 5e-3, "L(a=10%)")?;
    within(l20.get(), 128.3, 5e-3, "L(a=20%)")?;
    let a = symmetric_range(2000.0, 0.10).unwrap();
    let b = symmetric_range(2000.0, 0.20).unwrap();
    within(position_value(l10, &a, 1900.0), 967.63, 5e-3, "LP A value at 1900")?;
    within(position_value(l20, &b, 1900.0), 971.81, 5e-3, "LP B value at 1900")
}

fn c2_reset_worked_example() -> Outcome {
    let state = StrategyState::initialize(StrategyConfig::Reset { a: 0.10, r: 0.05 }, 2000.0, 1000.0)
        .map_err(|e| e.to_string())?;
    let held = state.positions()[0].reserves_at(2100.0);
    within(held.y, 765.06, 5e-3, "token Y before reset")?;
    within(held.x * 2100.0, 252.87, 5e-3, "token X value before reset")?;
    let after = state.on_close(2100.0).map_err(|e| e.to_string())?;
    ensure!(after.positions().len() == 2, "expected two positions after reset");
    within(after.positions()[0].liquidity.get(), 359.0, 1e-2, "lower-side liquidity")?;
    within(after.positions()[1].liquidity.get(), 119.0, 1e-2, "upper-side liquidity")?;
    let rr = after.reset_range().ok_or("reset range missing")?;
    within(rr.lower(), 2000.0, 1e-9, "reset range lower")?;
    within(rr.upper(), 2205.0, 1e-9, "reset range upper")
}

fn c3_leverage_ratio() -> Outcome {
    let ratio = liquidity_from_equal_value(2000.0, 0.10, 1000.0).unwrap().get()
        / liquidity_from_equal_value(2000.0, 0.20, 1000.0).unwrap().get();
    let closed = (1.0 - 1.2f64.powf(-0.5)) / (1.0 - 1.1f64.powf(-0.5));
    within(ratio, closed, 1e-9, "ratio vs closed form")?;
    within(ratio, 1.875, 5e-3, "ratio vs 1.875")
}

fn c4_property_suite() -> Outcome {
    const CASES: u32 = 1000;
    let liq = |v: f64| LiquidityAmount::new(v).unwrap();
    let ranges = (0.01f64..1e5, 1.0001f64..10.0)
        .prop_map(|(lo, k)| PriceRange::new(lo, lo * k).unwrap());

    property("boundary continuity", CASES, (0.1f64..1e6, ranges.clone()), |(l, range)| {
        for b in [range.lower(), range.upper()] {
            let at = position_value(liq(l), &range, b);
            for q in [b - 1e-9 * b, b + 1e-9 * b] {
                prop_assert!(rel(position_value(liq(l), &range, q), at) < 1e-6);
            }
        }
        Ok(())
    })?;

    property("monotone reserves", CASES, (0.1f64..1e6, ranges), |(l, range)| {
        let grid: Vec<f64> = (0..=50)
            .map(|k| range.lower() * 0.5 + (range.upper() * 1.5 - range.lower() * 0.5) * k as f64 / 50.0)
            .collect();
        for w in grid.windows(2) {
            let (lo, hi) = (real_reserves(liq(l), &range, w[0]), real_reserves(liq(l), &range, w[1]));
            prop_assert!(hi.x <= lo.x && hi.y >= lo.y);
        }
        Ok(())
    })?;

    property("equal-value split", CASES, (1e-3f64..1e5, 1e-3f64..10.0, 1e-3f64..1e6), |(p, a, w)| {
        let l = liquidity_from_equal_value(p, a, w).unwrap();
        let t = real_reserves(l, &symmetric_range(p, a).unwrap(), p);
        prop_assert!(rel(t.x * p, w / 2.0) < 1e-9 && rel(t.y, w / 2.0) < 1e-9);
        Ok(())
    })?;

    property(
        "hold dominance",
        CASES,
        (1e-3f64..5.0, 1.0f64..1e4, 0.01f64..100.0),
        |(a, p0, m)| {
            let hold = StrategyState::initialize(StrategyConfig::NoLp, p0, 1.0).unwrap();
            for config in [StrategyConfig::Fixed { a }, StrategyConfig::Passive] {
                let s = StrategyState::initialize(config, p0, 1.0).unwrap();
                prop_assert!(s.mark_to_market(p0 * m) <= hold.mark_to_market(p0 * m) + 1e-9);
            }
            Ok(())
        },
    )?;

    property(
        "reset value conservation",
        CASES,
        (1e-3f64..1.0, 1e-3f64..1.0, 1.0f64..1e4, prop::collection::vec(0.5f64..2.0, 1..6)),
        |(a, r, p0, path)| {
            let mut s = StrategyState::initialize(StrategyConfig::Reset { a, r }, p0, 1.0).unwrap();
            for m in path {
                let next = s.on_close(p0 * m).unwrap();
                prop_assert!(rel(next.mark_to_market(p0 * m), s.mark_to_market(p0 * m)) < 1e-9);
                s = next;
            }
            Ok(())
        },
    )?;

    property("fee linearity", CASES, (any_strategy(), bar_fixture(10)), |(config, bars)| {
        let one = run_backtest(&BacktestConfig::new(config, 0.003), &bars).unwrap();
        let two = run_backtest(
            &BacktestConfig { initial_value: 2.0, ..BacktestConfig::new(config, 0.003) },
            &bars,
        )
        .unwrap();
        prop_assert_eq!((one.fees, one.value, one.total), (two.fees, two.value, two.total));
        Ok(())
    })?;

    property("Fixed(a -> inf) ~ Passive", CASES, (1e6f64..1e9, 1.0f64..1e4, 0.5f64..=2.0), |(a, p0, m)| {
        let fixed = StrategyState::initialize(StrategyConfig::Fixed { a }, p0, 1.0).unwrap();
        let passive = StrategyState::initialize(StrategyConfig::Passive, p0, 1.0).unwrap();
        prop_assert!(rel(fixed.mark_to_market(p0 * m), passive.mark_to_market(p0 * m)) < 1e-3);
        Ok(())
    })
}

fn c5_engine_oracle() -> Outcome {
    property("oracle equivalence", 20, (any_strategy(), bar_fixture(10)), |(config, bars)| {
        let r = run_backtest(&BacktestConfig::new(config, 0.003), &bars).unwrap();
        let (fees, value, total) = oracle_metrics(config, 0.003, 1.0, &bars);
        prop_assert_eq!(r.fees.to_bits(), fees.to_bits(), "fees for {}", config);
        prop_assert_eq!(r.value.to_bits(), value.to_bits(), "value for {}", config);
        prop_assert_eq!(r.total.to_bits(), total.to_bits(), "total for {}", config);
        Ok(())
    })
}

fn c6_three_bar_fixture() -> Outcome {
    let bars = [
        HourlyBar::new(0, 2000.0, 0.0, 10_000.0),
        HourlyBar::new(3600, 2000.0, 1e6, 10_000.0),
        HourlyBar::new(7200, 2100.0, 1e6, 10_000.0),
    ];
    let r = run_backtest(&BacktestConfig::new(StrategyConfig::Fixed { a: 0.10 }, 0.003), &bars)
        .map_err(|e| e.to_string())?;
    // Ledger evaluated independently at 40 significant digits:
    //   L = 0.5 / (√2000 · (1 − 1.1^-½)) = 0.24024413275807417...
    //   fee per bar = 1e6 · 0.003 · L / 1e4 = 0.07207323982742225...
    //   value = position value at 2100 = 1.01844777891384338...
    //   total = (1 + f1) · (value + f1) = 1.16911840166184971...
    within(r.fees, 0.144_146_479_654_844_503_3, 1e-12, "fees")?;
    within(r.value, 1.018_447_778_913_843_384_5, 1e-12, "value")?;
    within(r.total, 1.169_118_401_661_849_710_3, 1e-12, "total")
}

fn c7_stable_pair_sanity() -> Outcome {
    let bars: Vec<HourlyBar> = (0..24 * 30)
        .map(|h| HourlyBar::new(1_622_505_600 + h * 3600, 1.0, 2e6, 5e8))
        .collect();
    let series = BarSeries::new(PairProfile::stable(), 0.0005, bars, "synthetic")
        .map_err(|e| e.to_string())?;
    let grid = build_grid(&GridSpec::new(PairClass::Stable, StrategyKind::Fixed))
        .map_err(|e| e.to_string())?;
    ensure!(grid.len() == 500, "grid has {} points", grid.len());
    let results = run_sweep(&grid, &series, RangePolicy::Exact).map_err(|e| e.to_string())?;
    let summary = rank_results(results, run_baselines(&series).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(
        summary.best_total.config == StrategyConfig::Fixed { a: 0.001 },
        "best total is {}",
        summary.best_total.config
    );

    let run = |s| run_backtest(&BacktestConfig::new(s, 0.0005), &series.bars).unwrap();
    let fixed = run(StrategyConfig::Fixed { a: 0.001 });
    let reset = run(StrategyConfig::Reset { a: 0.001, r: 0.001 });
    ensure!(
        (fixed.fees, fixed.value, fixed.total) == (reset.fees, reset.value, reset.total),
        "Reset(0.1%, 0.1%) {:?} differs from Fixed(0.1%) {:?}",
        (reset.fees, reset.value, reset.total),
        (fixed.fees, fixed.value, fixed.total)
    );
    Ok(())
}

fn c8_daily_returns() -> Outcome {
    let day1 = 1_609_459_200; // 2021-01-01T00:00:00Z
    let mut bars = Vec::new();
    for h in 0..24 {
        bars.push(HourlyBar::new(day1 + h * 3600, 1.0, 25_000.0, 1.0).with_tvl(1e8));
    }
    for h in 0..24 {
        let tvl = if h == 23 { 5e7 } else { 9e9 };
        bars.push(HourlyBar::new(day1 + 86_400 + h * 3600, 1.0, 12_500.0, 1.0).with_tvl(tvl));
    }
    let series = BarSeries::new(PairProfile::stable(), 0.003, bars, "two-day")
        .map_err(|e| e.to_string())?;
    let points = daily_fee_returns(&series).map_err(|e| e.to_string())?;
    ensure!(points.len() == 2, "expected 2 days, got {}", points.len());
    // Day 1: 600,000 · 0.003 / 1e8 = 1.8e-5. Day 2: 300,000 · 0.003 / 5e7 = 1.8e-5.
    let d1 = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    let d2 = NaiveDate::from_ymd_opt(2021, 1, 2).unwrap();
    ensure!(points[0].date == d1 && points[1].date == d2, "dates {:?}", points);
    within(points[0].lp_return, 1.8e-5, 1e-12, "day 1 return")?;
    within(points[1].lp_return, 1.8e-5, 1e-12, "day 2 return")?;
    let mean = average_daily_return(&points, d1, d2).map_err(|e| e.to_string())?;
    within(mean, 1.8e-5, 1e-12, "average")
}

fn c9_data_validation() -> Outcome {
    let load = |text: &str| load_bars(text.as_bytes(), PairProfile::volatile(), 0.003, "t");
    let header = "timestamp,price,volume,pool_liquidity,tvl\n";
    let expect_row = |res: clbacktest::Result<BarSeries>, row: usize, needle: &str| -> Outcome {
        match res {
            Err(Error::Data { row: Some(r), message }) if r == row && message.contains(needle) => Ok(()),
            other => Err(format!("expected data error at row {row} mentioning '{needle}', got {other:?}")),
        }
    };
    expect_row(load(&format!("{header}0,1,1,1,\n3600,1,-1,1,\n")), 2, "volume")?;
    expect_row(load(&format!("{header}0,1,1,1,\n7200,1,1,1,\n3600,1,1,1,\n")), 3, "timestamps not increasing")?;
    match load("timestamp,price,pool_liquidity,tvl\n0,1,1,\n") {
        Err(Error::Data { message, .. }) if message.contains("missing column 'volume'") => {}
        other => return Err(format!("missing column not reported: {other:?}")),
    }

    let bars = vec![
        HourlyBar::new(0, 2000.123_456_789_012_3, 1.0 / 3.0, 7.7e15).with_tvl(1.234e8),
        HourlyBar::new(3600, 0.1 + 0.2, 0.0, 1e-300),
    ];
    let series = BarSeries::new(PairProfile::volatile(), 0.003, bars, "t").unwrap();
    let mut buf = Vec::new();
    write_bars(&series, &mut buf).map_err(|e| e.to_string())?;
    let back = load(std::str::from_utf8(&buf).unwrap()).map_err(|e| e.to_string())?;
    ensure!(back == series, "round trip changed the series");
    Ok(())
}

fn c10_grid_cardinalities() -> Outcome {
    let grid = |class, kind| build_grid(&GridSpec::new(class, kind)).unwrap();
    let vf = grid(PairClass::Volatile, StrategyKind::Fixed);
    ensure!(vf.len() == 166, "volatile Fixed has {} configs", vf.len());
    ensure!(vf.last().unwrap().a() == Some(0.996), "last a is {:?}", vf.last().unwrap().a());
    let sf = grid(PairClass::Stable, StrategyKind::Fixed);
    ensure!(sf.len() == 500, "stable Fixed has {} configs", sf.len());
    let sr = grid(PairClass::Stable, StrategyKind::Reset);
    ensure!(sr.len() == 2500, "stable Reset has {} configs", sr.len());
    ensure!(
        sr.contains(&StrategyConfig::Reset { a: 0.002, r: 0.004 }),
        "stable Reset grid lacks (0.2%, 0.4%)"
    );
    Ok(())
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("C1  liquidity worked example", Duration::from_secs(1), c1_liquidity_worked_example),
        ("C2  reset worked example", Duration::from_secs(1), c2_reset_worked_example),
        ("C3  leverage ratio", Duration::from_secs(1), c3_leverage_ratio),
        ("C4  property suite (1000 cases each)", Duration::from_secs(30), c4_property_suite),
        ("C5  engine vs brute-force ledger", Duration::from_secs(30), c5_engine_oracle),
        ("C6  hand-computed 3-bar fixture", Duration::from_secs(1), c6_three_bar_fixture),
        ("C7  stable-pair sanity sweep", Duration::from_secs(60), c7_stable_pair_sanity),
        ("C8  daily fee returns", Duration::from_secs(1), c8_daily_returns),
        ("C9  data validation and round trip", Duration::from_secs(1), c9_data_validation),
        ("C10 grid cardinalities", Duration::from_secs(1), c10_grid_cardinalities),
    ];

    let mut failures = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= budget {
                Ok(())
            } else {
                Err(format!("took {elapsed:?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(()) => println!("PASS  {name}  ({:.3}s)", elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}  ({:.3}s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
