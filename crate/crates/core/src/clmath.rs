//! Closed-form concentrated-liquidity math.
//!
//! Prices are quoted as token Y per token X (e.g. USDC per ETH). A position
//! of liquidity `L` on `[lower, upper]` has virtual reserves
//! `x' = L/√p`, `y' = L·√p` and real reserves
//!
//! ```text
//! x(p) = L·(1/√p − 1/√upper)
//! y(p) = L·(√p − √lower)
//! ```
//!
//! for `p` inside the range, clamped to the nearer boundary outside it.
//! Everything here is `f64`; no on-chain fixed-point emulation is attempted.

use crate::error::{Error, Result};

/// Base of the tick grid: tick `i` sits at price `1.0001^i`.
pub const TICK_BASE: f64 = 1.0001;

/// Largest tick magnitude accepted by [`tick_price`].
pub const MAX_TICK: i32 = 887_272;

/// A price interval `[lower, upper]` with `0 < lower < upper < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRange {
    lower: f64,
    upper: f64,
}

impl PriceRange {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::domain(format!(
                "range bounds must be finite, got [{lower}, {upper}]"
            )));
        }
        if !(lower > 0.0 && lower < upper) {
            return Err(Error::domain(format!(
                "range bounds must satisfy 0 < lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Closed containment, `lower <= p <= upper`.
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    /// Open containment, `lower < p < upper`.
    pub fn strictly_contains(&self, p: f64) -> bool {
        self.lower < p && p < self.upper
    }
}

/// Amount of liquidity `L`, in units of `sqrt(tokenX · tokenY)`.
///
/// The constant-product invariant of the position's virtual reserves is
/// `k = L²` (see [`LiquidityAmount::invariant`]).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LiquidityAmount(f64);

impl LiquidityAmount {
    pub const ZERO: LiquidityAmount = LiquidityAmount(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::domain(format!(
                "liquidity must be finite and non-negative, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `k = L²`.
    pub fn invariant(self) -> f64 {
        self.0 * self.0
    }

    /// Multiplies the liquidity by a non-negative factor.
    pub fn scaled(self, factor: f64) -> Self {
        debug_assert!(factor >= 0.0 && factor.is_finite());
        Self(self.0 * factor)
    }
}

impl std::ops::Add for LiquidityAmount {
    type Output = LiquidityAmount;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::iter::Sum for LiquidityAmount {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(LiquidityAmount::ZERO, |acc, l| acc + l)
    }
}

/// Real token quantities `(x, y)`, both non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TokenAmounts {
    pub x: f64,
    pub y: f64,
}

impl TokenAmounts {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0) {
            return Err(Error::domain(format!(
                "token amounts must be finite and non-negative, got ({x}, {y})"
            )));
        }
        Ok(Self { x, y })
    }

    /// Value in token Y at price `p`.
    pub fn value_at(&self, p: f64) -> f64 {
        self.y + self.x * p
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x * factor,
            y: self.y * factor,
        }
    }
}

impl std::ops::Add for TokenAmounts {
    type Output = TokenAmounts;

    fn add(self, rhs: Self) -> Self {
        Self {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
        }
    }
}

/// Virtual reserves of a position at a given price: `x'·y' = L²`, `y'/x' = p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualReserves {
    pub x_virtual: f64,
    pub y_virtual: f64,
}

/// Virtual reserves of liquidity `liquidity` evaluated at price `p`.
pub fn virtual_reserves(liquidity: LiquidityAmount, p: f64) -> Result<VirtualReserves> {
    check_price(p)?;
    if liquidity.get() <= 0.0 {
        return Err(Error::domain("virtual reserves need positive liquidity"));
    }
    let sqrt_p = p.sqrt();
    Ok(VirtualReserves {
        x_virtual: liquidity.get() / sqrt_p,
        y_virtual: liquidity.get() * sqrt_p,
    })
}

/// Static description of a trading pair / pool family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairProfile {
    pub name: String,
    pub tick_spacing: u32,
    /// Token Y is the USD-pegged numeraire.
    pub quote_is_stable: bool,
}

impl PairProfile {
    pub fn new(name: impl Into<String>, tick_spacing: u32, quote_is_stable: bool) -> Result<Self> {
        if tick_spacing == 0 {
            return Err(Error::domain("tick spacing must be at least 1"));
        }
        Ok(Self {
            name: name.into(),
            tick_spacing,
            quote_is_stable,
        })
    }

    /// ETH-USDC-like pool (tick spacing 60).
    pub fn volatile() -> Self {
        Self {
            name: "volatile".to_string(),
            tick_spacing: 60,
            quote_is_stable: true,
        }
    }

    /// USDT-USDC-like pool (tick spacing 10).
    pub fn stable() -> Self {
        Self {
            name: "stable".to_string(),
            tick_spacing: 10,
            quote_is_stable: true,
        }
    }
}

fn check_price(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("price must be positive and finite, got {p}")))
    }
}

fn check_width(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("width parameter must satisfy a > 0, got {a}")))
    }
}

fn raw_tick_price(i: i64) -> f64 {
    // powi takes i32; callers keep |i| well inside that.
    TICK_BASE.powi(i as i32)
}

/// Price of tick `i`, `1.0001^i`.
pub fn tick_price(i: i32) -> Result<f64> {
    if i.abs() > MAX_TICK {
        return Err(Error::domain(format!(
            "tick index {i} outside [-{MAX_TICK}, {MAX_TICK}]"
        )));
    }
    Ok(raw_tick_price(i64::from(i)))
}

/// Greatest tick `i` with `tick_price(i) <= p`.
pub fn tick_index(p: f64) -> Result<i32> {
    check_price(p)?;
    let estimate = (p.ln() / TICK_BASE.ln()).floor() as i64;
    let mut i = estimate;
    // The log ratio can land one off near a tick boundary.
    while raw_tick_price(i) > p {
        i -= 1;
    }
    while raw_tick_price(i + 1) <= p {
        i += 1;
    }
    i32::try_from(i).map_err(|_| Error::domain(format!("price {p} maps outside the tick range")))
}

/// The symmetric range `[p/(1+a), p·(1+a)]`.
pub fn symmetric_range(p: f64, a: f64) -> Result<PriceRange> {
    check_price(p)?;
    check_width(a)?;
    PriceRange::new(p / (1.0 + a), p * (1.0 + a))
}

/// Nearest usable tick (a multiple of `spacing`) to `p`, measured in log space.
pub fn nearest_usable_tick(p: f64, spacing: u32) -> Result<i32> {
    check_price(p)?;
    if spacing == 0 {
        return Err(Error::domain("tick spacing must be at least 1"));
    }
    let s = f64::from(spacing);
    let i = ((p.ln() / TICK_BASE.ln()) / s).round() * s;
    Ok(i as i32)
}

/// Symmetric range with both bounds moved to the nearest usable tick.
///
/// The bounds are pushed outward by one spacing if snapping would put `p`
/// on or outside the range, so the result always contains `p` strictly.
pub fn snapped_symmetric_range(p: f64, a: f64, spacing: u32) -> Result<PriceRange> {
    let exact = symmetric_range(p, a)?;
    let step = spacing as i32;
    let mut lo = nearest_usable_tick(exact.lower(), spacing)?;
    let mut hi = nearest_usable_tick(exact.upper(), spacing)?;
    while tick_price(lo)? >= p {
        lo -= step;
    }
    while tick_price(hi)? <= p {
        hi += step;
    }
    PriceRange::new(tick_price(lo)?, tick_price(hi)?)
}

/// Token amounts held by liquidity `L` on `range` at price `p`.
///
/// Boundary prices use the in-range formula; both branches agree there.
pub fn real_reserves(liquidity: LiquidityAmount, range: &PriceRange, p: f64) -> TokenAmounts {
    let l = liquidity.get();
    let sqrt_lower = range.lower.sqrt();
    let sqrt_upper = range.upper.sqrt();
    if p < range.lower {
        TokenAmounts {
            x: l * (1.0 / sqrt_lower - 1.0 / sqrt_upper),
            y: 0.0,
        }
    } else if p > range.upper {
        TokenAmounts {
            x: 0.0,
            y: l * (sqrt_upper - sqrt_lower),
        }
    } else {
        let sqrt_p = p.sqrt();
        TokenAmounts {
            x: l * (1.0 / sqrt_p - 1.0 / sqrt_upper),
            y: l * (sqrt_p - sqrt_lower),
        }
    }
}

/// Value of the position in token Y, `y(p) + x(p)·p`.
pub fn position_value(liquidity: LiquidityAmount, range: &PriceRange, p: f64) -> f64 {
    real_reserves(liquidity, range, p).value_at(p)
}

/// Liquidity bought by `total_value` split equally between both tokens on
/// the symmetric range of width `a` around `p`.
pub fn liquidity_from_equal_value(p: f64, a: f64, total_value: f64) -> Result<LiquidityAmount> {
    check_price(p)?;
    check_width(a)?;
    if !total_value.is_finite() || total_value < 0.0 {
        return Err(Error::domain(format!(
            "deposit value must be finite and non-negative, got {total_value}"
        )));
    }
    let per_side = total_value / 2.0;
    LiquidityAmount::new(per_side / (p.sqrt() * (1.0 - (1.0 + a).powf(-0.5))))
}

/// Liquidity bought by depositing `total_value` at price `p` into an
/// arbitrary range, in whatever token ratio the range requires.
pub fn liquidity_for_value(range: &PriceRange, p: f64, total_value: f64) -> Result<LiquidityAmount> {
    check_price(p)?;
    if !total_value.is_finite() || total_value < 0.0 {
        return Err(Error::domain(format!(
            "deposit value must be finite and non-negative, got {total_value}"
        )));
    }
    let per_unit = position_value(LiquidityAmount(1.0), range, p);
    LiquidityAmount::new(total_value / per_unit)
}

/// Liquidity from a single-token deposit at the range boundary adjacent to
/// that token's side: token Y at `upper`, token X at `lower`.
pub fn liquidity_one_sided(
    range: &PriceRange,
    deposit: TokenAmounts,
    p: f64,
) -> Result<LiquidityAmount> {
    check_price(p)?;
    match (deposit.x > 0.0, deposit.y > 0.0) {
        (true, true) => Err(Error::contract(
            "one-sided deposit must contain exactly one token, got both",
        )),
        (false, false) => Ok(LiquidityAmount::ZERO),
        (false, true) => {
            if p != range.upper {
                return Err(Error::contract(format!(
                    "token-Y deposit must be made at the upper bound {}, got price {p}",
                    range.upper
                )));
            }
            LiquidityAmount::new(deposit.y / (range.upper.sqrt() - range.lower.sqrt()))
        }
        (true, false) => {
            if p != range.lower {
                return Err(Error::contract(format!(
                    "token-X deposit must be made at the lower bound {}, got price {p}",
                    range.lower
                )));
            }
            LiquidityAmount::new(deposit.x / (1.0 / range.lower.sqrt() - 1.0 / range.upper.sqrt()))
        }
    }
}
