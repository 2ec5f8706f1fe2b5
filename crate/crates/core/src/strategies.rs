//! Liquidity-provision strategies and their state machines.
//!
//! Four strategies are modelled:
//!
//! - **No-LP**: hold half the budget in each token, provide nothing.
//! - **Passive**: full-range liquidity, as in a constant-product v2 pool.
//! - **Fixed(a)**: one symmetric range `[p/(1+a), p·(1+a)]`, never adjusted.
//! - **Reset(a, r)**: like Fixed, but once the closing price leaves the
//!   resetting range `(p_r/(1+r), p_r·(1+r))` the whole portfolio is withdrawn
//!   and redeposited as two one-sided positions split at the current price.
//!
//! [`StrategyState`] is an immutable value; [`StrategyState::on_close`]
//! returns the successor state.

use std::fmt;
use std::str::FromStr;

use crate::clmath::{
    liquidity_for_value, liquidity_from_equal_value, liquidity_one_sided, position_value,
    real_reserves, snapped_symmetric_range, symmetric_range, LiquidityAmount, PriceRange,
    TokenAmounts,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    NoLp,
    Passive,
    Fixed,
    Reset,
}

impl StrategyKind {
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::NoLp => "nolp",
            StrategyKind::Passive => "passive",
            StrategyKind::Fixed => "fixed",
            StrategyKind::Reset => "reset",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Strategy selection plus its parameters.
///
/// `a` is the liquidity-range width parameter, `r` the resetting-range width.
/// Textual form: `nolp`, `passive`, `fixed:a=0.10`, `reset:a=0.10,r=0.05`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyConfig {
    NoLp,
    Passive,
    Fixed { a: f64 },
    Reset { a: f64, r: f64 },
}

impl StrategyConfig {
    pub fn fixed(a: f64) -> Result<Self> {
        let config = StrategyConfig::Fixed { a };
        config.validate()?;
        Ok(config)
    }

    pub fn reset(a: f64, r: f64) -> Result<Self> {
        let config = StrategyConfig::Reset { a, r };
        config.validate()?;
        Ok(config)
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            StrategyConfig::NoLp => StrategyKind::NoLp,
            StrategyConfig::Passive => StrategyKind::Passive,
            StrategyConfig::Fixed { .. } => StrategyKind::Fixed,
            StrategyConfig::Reset { .. } => StrategyKind::Reset,
        }
    }

    pub fn a(&self) -> Option<f64> {
        match *self {
            StrategyConfig::Fixed { a } | StrategyConfig::Reset { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn r(&self) -> Option<f64> {
        match *self {
            StrategyConfig::Reset { r, .. } => Some(r),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("parameter {name} must satisfy {name} > 0, got {v}")))
            }
        }
        if let Some(a) = self.a() {
            positive("a", a)?;
        }
        if let Some(r) = self.r() {
            positive("r", r)?;
        }
        Ok(())
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyConfig::NoLp => write!(f, "nolp"),
            StrategyConfig::Passive => write!(f, "passive"),
            StrategyConfig::Fixed { a } => write!(f, "fixed:a={a}"),
            StrategyConfig::Reset { a, r } => write!(f, "reset:a={a},r={r}"),
        }
    }
}

impl FromStr for StrategyConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((name, params)) => (name, Some(params)),
            None => (s, None),
        };

        let mut a = None;
        let mut r = None;
        if let Some(params) = params {
            for pair in params.split(',') {
                let (key, value) = pair.split_once('=').ok_or_else(|| {
                    Error::usage(format!("strategy parameter '{pair}' is not of the form key=value"))
                })?;
                let value: f64 = value.trim().parse().map_err(|_| {
                    Error::usage(format!(
                        "strategy parameter {key} has non-numeric value '{value}' (use decimals, e.g. 0.10)"
                    ))
                })?;
                let slot = match key.trim() {
                    "a" => &mut a,
                    "r" => &mut r,
                    other => {
                        return Err(Error::usage(format!("unknown strategy parameter '{other}'")))
                    }
                };
                if slot.replace(value).is_some() {
                    return Err(Error::usage(format!("strategy parameter {key} given twice")));
                }
            }
        }

        let missing = |p: &str| Error::usage(format!("strategy '{name}' requires parameter {p}"));
        let config = match name.trim().to_ascii_lowercase().as_str() {
            "nolp" | "no-lp" if a.is_none() && r.is_none() => StrategyConfig::NoLp,
            "passive" if a.is_none() && r.is_none() => StrategyConfig::Passive,
            "nolp" | "no-lp" | "passive" => {
                return Err(Error::usage(format!("strategy '{name}' takes no parameters")))
            }
            "fixed" => {
                if r.is_some() {
                    return Err(Error::usage("strategy 'fixed' takes only parameter a"));
                }
                StrategyConfig::Fixed {
                    a: a.ok_or_else(|| missing("a"))?,
                }
            }
            "reset" => StrategyConfig::Reset {
                a: a.ok_or_else(|| missing("a"))?,
                r: r.ok_or_else(|| missing("r"))?,
            },
            other => {
                return Err(Error::usage(format!(
                    "unknown strategy '{other}' (expected nolp, passive, fixed:a=.., reset:a=..,r=..)"
                )))
            }
        };
        config.validate()?;
        Ok(config)
    }
}

/// How liquidity range bounds are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangePolicy {
    /// Bounds at exactly `p·(1+a)^{±1}`.
    #[default]
    Exact,
    /// Outer bounds moved to the nearest tick that is a multiple of `spacing`.
    /// The split point of a reset stays at the current price.
    SnapToTicks { spacing: u32 },
}

impl RangePolicy {
    fn liquidity_range(self, p: f64, a: f64) -> Result<PriceRange> {
        match self {
            RangePolicy::Exact => symmetric_range(p, a),
            RangePolicy::SnapToTicks { spacing } => snapped_symmetric_range(p, a, spacing),
        }
    }
}

/// Liquidity `L` provided on a bounded price range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiquidityPosition {
    pub range: PriceRange,
    pub liquidity: LiquidityAmount,
}

impl LiquidityPosition {
    pub fn value_at(&self, p: f64) -> f64 {
        position_value(self.liquidity, &self.range, p)
    }

    pub fn reserves_at(&self, p: f64) -> TokenAmounts {
        real_reserves(self.liquidity, &self.range, p)
    }
}

/// Complete portfolio of one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyState {
    config: StrategyConfig,
    policy: RangePolicy,
    positions: Vec<LiquidityPosition>,
    /// Passive only: liquidity spread over `(0, ∞)`.
    full_range: Option<LiquidityAmount>,
    holdings: TokenAmounts,
    reset_range: Option<PriceRange>,
    entry_price: f64,
}

impl StrategyState {
    /// Deploys `budget` (token Y) at price `p0` with exact range bounds.
    pub fn initialize(config: StrategyConfig, p0: f64, budget: f64) -> Result<Self> {
        Self::initialize_with_policy(config, RangePolicy::Exact, p0, budget)
    }

    pub fn initialize_with_policy(
        config: StrategyConfig,
        policy: RangePolicy,
        p0: f64,
        budget: f64,
    ) -> Result<Self> {
        config.validate().map_err(|e| Error::contract(e.to_string()))?;
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::domain(format!("initial price must be positive, got {p0}")));
        }
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::domain(format!("budget must be non-negative, got {budget}")));
        }

        let mut state = StrategyState {
            config,
            policy,
            positions: Vec::new(),
            full_range: None,
            holdings: TokenAmounts::default(),
            reset_range: None,
            entry_price: p0,
        };

        match config {
            StrategyConfig::NoLp => {
                state.holdings = TokenAmounts {
                    x: budget / (2.0 * p0),
                    y: budget / 2.0,
                };
            }
            StrategyConfig::Passive => {
                // Virtual reserves of a full range equal the real ones: y' = L·√p0 = W/2.
                state.full_range = Some(LiquidityAmount::new(budget / (2.0 * p0.sqrt()))?);
            }
            StrategyConfig::Fixed { a } => {
                state.positions.push(initial_position(policy, p0, a, budget)?);
            }
            StrategyConfig::Reset { a, r } => {
                state.positions.push(initial_position(policy, p0, a, budget)?);
                state.reset_range = Some(symmetric_range(p0, r)?);
            }
        }
        Ok(state)
    }

    pub fn config(&self) -> StrategyConfig {
        self.config
    }

    pub fn policy(&self) -> RangePolicy {
        self.policy
    }

    pub fn positions(&self) -> &[LiquidityPosition] {
        &self.positions
    }

    pub fn full_range_liquidity(&self) -> Option<LiquidityAmount> {
        self.full_range
    }

    pub fn holdings(&self) -> TokenAmounts {
        self.holdings
    }

    pub fn reset_range(&self) -> Option<PriceRange> {
        self.reset_range
    }

    pub fn entry_price(&self) -> f64 {
        self.entry_price
    }

    /// Applies the strategy's reaction to an hourly closing price.
    ///
    /// Only Reset strategies ever change. A reset fires when `p` is on or
    /// outside the bounds of the current resetting range.
    pub fn on_close(&self, p: f64) -> Result<StrategyState> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::domain(format!("price must be positive, got {p}")));
        }
        let StrategyConfig::Reset { a, r } = self.config else {
            return Ok(self.clone());
        };
        match self.reset_range {
            Some(range) if range.strictly_contains(p) => return Ok(self.clone()),
            _ => {}
        }

        let tokens = self
            .positions
            .iter()
            .map(|pos| pos.reserves_at(p))
            .fold(self.holdings, |acc, t| acc + t);

        let outer = self.policy.liquidity_range(p, a)?;
        let below = PriceRange::new(outer.lower(), p)?;
        let above = PriceRange::new(p, outer.upper())?;
        let below_liquidity = liquidity_one_sided(&below, TokenAmounts { x: 0.0, y: tokens.y }, p)?;
        let above_liquidity = liquidity_one_sided(&above, TokenAmounts { x: tokens.x, y: 0.0 }, p)?;

        Ok(StrategyState {
            positions: vec![
                LiquidityPosition {
                    range: below,
                    liquidity: below_liquidity,
                },
                LiquidityPosition {
                    range: above,
                    liquidity: above_liquidity,
                },
            ],
            holdings: TokenAmounts::default(),
            reset_range: Some(symmetric_range(p, r)?),
            ..self.clone()
        })
    }

    /// Liquidity earning fees when the pool price is `p`.
    ///
    /// Containment is boundary-inclusive, except that a price sitting on a
    /// boundary shared by two adjacent positions counts only toward the lower
    /// one, so liquidity is never double-counted.
    pub fn active_liquidity(&self, p: f64) -> LiquidityAmount {
        if let Some(l) = self.full_range {
            return l;
        }
        self.positions
            .iter()
            .filter(|pos| pos.range.contains(p))
            .filter(|pos| {
                !(pos.range.lower() == p
                    && self.positions.iter().any(|other| other.range.upper() == p))
            })
            .map(|pos| pos.liquidity)
            .sum()
    }

    /// Value of every position plus idle holdings at price `p`, in token Y.
    pub fn mark_to_market(&self, p: f64) -> f64 {
        let passive = self
            .full_range
            .map_or(0.0, |l| 2.0 * l.get() * p.sqrt());
        let bounded: f64 = self.positions.iter().map(|pos| pos.value_at(p)).sum();
        bounded + passive + self.holdings.value_at(p)
    }

    /// Scales every liquidity amount and holding by `factor`.
    ///
    /// Equivalent to depositing `(factor − 1)` times the current value at the
    /// current price in the current token mix.
    pub fn scaled(&self, factor: f64) -> StrategyState {
        StrategyState {
            positions: self
                .positions
                .iter()
                .map(|pos| LiquidityPosition {
                    range: pos.range,
                    liquidity: pos.liquidity.scaled(factor),
                })
                .collect(),
            full_range: self.full_range.map(|l| l.scaled(factor)),
            holdings: self.holdings.scaled(factor),
            ..self.clone()
        }
    }
}

fn initial_position(policy: RangePolicy, p0: f64, a: f64, budget: f64) -> Result<LiquidityPosition> {
    let range = policy.liquidity_range(p0, a)?;
    let liquidity = match policy {
        RangePolicy::Exact => liquidity_from_equal_value(p0, a, budget)?,
        // Snapped bounds are no longer symmetric, so the token ratio differs.
        RangePolicy::SnapToTicks { .. } => liquidity_for_value(&range, p0, budget)?,
    };
    Ok(LiquidityPosition { range, liquidity })
}
