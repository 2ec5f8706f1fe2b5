//! Test-only helpers: a brute-force backtest ledger written straight from the
//! metric definitions, sharing no code with the engine, plus fixture
//! generators.

#![allow(dead_code)]

use clbacktest::{HourlyBar, StrategyConfig};
use proptest::prelude::*;

/// A bounded position as a bare `(lower, upper, liquidity)` triple.
#[derive(Clone, Copy, Debug)]
struct Slice {
    lo: f64,
    hi: f64,
    liq: f64,
}

#[derive(Clone, Debug)]
struct Book {
    slices: Vec<Slice>,
    passive_liq: f64,
    hold_x: f64,
    hold_y: f64,
    reset_lo: f64,
    reset_hi: f64,
}

fn slice_tokens(s: &Slice, p: f64) -> (f64, f64) {
    let q = p.max(s.lo).min(s.hi);
    // x(q) = L(1/√q − 1/√hi), y(q) = L(√q − √lo), with q clamped to the range.
    let x = if p > s.hi { 0.0 } else { s.liq * (1.0 / q.sqrt() - 1.0 / s.hi.sqrt()) };
    let y = if p < s.lo { 0.0 } else { s.liq * (q.sqrt() - s.lo.sqrt()) };
    (x, y)
}

impl Book {
    fn open(config: StrategyConfig, p0: f64, w: f64) -> Book {
        let mut book = Book {
            slices: vec![],
            passive_liq: 0.0,
            hold_x: 0.0,
            hold_y: 0.0,
            reset_lo: 0.0,
            reset_hi: f64::INFINITY,
        };
        let equal_split = |a: f64| Slice {
            lo: p0 / (1.0 + a),
            hi: p0 * (1.0 + a),
            liq: (w / 2.0) / (p0.sqrt() * (1.0 - (1.0 + a).powf(-0.5))),
        };
        match config {
            StrategyConfig::NoLp => {
                book.hold_x = w / (2.0 * p0);
                book.hold_y = w / 2.0;
            }
            StrategyConfig::Passive => book.passive_liq = w / (2.0 * p0.sqrt()),
            StrategyConfig::Fixed { a } => book.slices.push(equal_split(a)),
            StrategyConfig::Reset { a, r } => {
                book.slices.push(equal_split(a));
                book.reset_lo = p0 / (1.0 + r);
                book.reset_hi = p0 * (1.0 + r);
            }
        }
        book
    }

    fn worth(&self, p: f64) -> f64 {
        let mut bounded = 0.0;
        for s in &self.slices {
            let (x, y) = slice_tokens(s, p);
            bounded += y + x * p;
        }
        bounded + 2.0 * self.passive_liq * p.sqrt() + (self.hold_y + self.hold_x * p)
    }

    fn earning_liquidity(&self, p: f64) -> f64 {
        if self.passive_liq > 0.0 {
            return self.passive_liq;
        }
        let mut total = 0.0;
        for (i, s) in self.slices.iter().enumerate() {
            if p < s.lo || p > s.hi {
                continue;
            }
            let shares_boundary_below = self
                .slices
                .iter()
                .enumerate()
                .any(|(j, t)| j != i && t.hi == p && s.lo == p);
            if !shares_boundary_below {
                total += s.liq;
            }
        }
        total
    }

    fn grow(&mut self, factor: f64) {
        for s in &mut self.slices {
            s.liq *= factor;
        }
        self.passive_liq *= factor;
        self.hold_x *= factor;
        self.hold_y *= factor;
    }

    fn close(&mut self, config: StrategyConfig, p: f64) {
        let StrategyConfig::Reset { a, r } = config else {
            return;
        };
        if self.reset_lo < p && p < self.reset_hi {
            return;
        }
        let (mut x, mut y) = (self.hold_x, self.hold_y);
        for s in &self.slices {
            let (sx, sy) = slice_tokens(s, p);
            x += sx;
            y += sy;
        }
        let lo = p / (1.0 + a);
        let hi = p * (1.0 + a);
        self.slices = vec![
            Slice { lo, hi: p, liq: y / (p.sqrt() - lo.sqrt()) },
            Slice { lo: p, hi, liq: x / (1.0 / p.sqrt() - 1.0 / hi.sqrt()) },
        ];
        self.hold_x = 0.0;
        self.hold_y = 0.0;
        self.reset_lo = p / (1.0 + r);
        self.reset_hi = p * (1.0 + r);
    }
}

/// `(fees, value, total)` per unit of `initial`, computed bar by bar.
pub fn oracle_metrics(
    config: StrategyConfig,
    fee_rate: f64,
    initial: f64,
    bars: &[HourlyBar],
) -> (f64, f64, f64) {
    let p0 = bars[0].price;
    let mut kept_aside = Book::open(config, p0, initial);
    let mut reinvested = kept_aside.clone();
    let mut fee_income = 0.0;
    for bar in &bars[1..] {
        let p = bar.price;
        let f_aside = bar.volume * fee_rate * kept_aside.earning_liquidity(p) / bar.pool_liquidity;
        let f_reinv = bar.volume * fee_rate * reinvested.earning_liquidity(p) / bar.pool_liquidity;
        let before = reinvested.worth(p);
        if before > 0.0 {
            reinvested.grow((before + f_reinv) / before);
        }
        kept_aside.close(config, p);
        reinvested.close(config, p);
        fee_income += f_aside;
    }
    let last = bars[bars.len() - 1].price;
    (
        fee_income / initial,
        kept_aside.worth(last) / initial,
        reinvested.worth(last) / initial,
    )
}

/// Any of the four strategies with parameters in `[0.005, 0.5]`.
pub fn any_strategy() -> impl Strategy<Value = StrategyConfig> {
    prop_oneof![
        Just(StrategyConfig::NoLp),
        Just(StrategyConfig::Passive),
        (0.005f64..0.5).prop_map(|a| StrategyConfig::Fixed { a }),
        (0.005f64..0.5, 0.005f64..0.5).prop_map(|(a, r)| StrategyConfig::Reset { a, r }),
    ]
}

/// Hourly fixtures of 2..=`max_len` bars with prices within ±30% of the first.
pub fn bar_fixture(max_len: usize) -> impl Strategy<Value = Vec<HourlyBar>> {
    (
        1.0f64..5000.0,
        prop::collection::vec((0.7f64..1.3, 0.0f64..1e6, 1.0f64..1e6), 1..max_len),
    )
        .prop_map(|(p0, rest)| {
            let mut bars = vec![HourlyBar::new(0, p0, 0.0, 1e4)];
            for (i, (m, v, l)) in rest.into_iter().enumerate() {
                bars.push(HourlyBar::new((i as i64 + 1) * 3600, p0 * m, v, l));
            }
            bars
        })
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}
