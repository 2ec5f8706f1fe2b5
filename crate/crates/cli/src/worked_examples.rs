//! Self-check: recompute the two reference scenarios (two LPs with different
//! ranges at ETH = 2000, and a Reset(10%, 5%) position re-centred at 2100)
//! and compare against the hand-worked reference figures.

use std::fmt::Write as _;

use clbacktest::clmath::{liquidity_from_equal_value, real_reserves, symmetric_range};
use clbacktest::{StrategyConfig, StrategyState};

use crate::commands::{CliError, Report};

const TOLERANCE: f64 = 0.005;

struct Check {
    label: &'static str,
    computed: f64,
    reference: f64,
}

impl Check {
    fn rel_error(&self) -> f64 {
        (self.computed - self.reference).abs() / self.reference.abs()
    }

    fn passes(&self) -> bool {
        self.rel_error() <= TOLERANCE
    }
}

fn checks() -> Result<Vec<Check>, CliError> {
    let (p0, budget) = (2000.0, 1000.0);
    let narrow = symmetric_range(p0, 0.10)?;
    let wide = symmetric_range(p0, 0.20)?;
    let l_narrow = liquidity_from_equal_value(p0, 0.10, budget)?;
    let l_wide = liquidity_from_equal_value(p0, 0.20, budget)?;
    let value_at = |l, range, p: f64| {
        let t = real_reserves(l, range, p);
        t.y + t.x * p
    };

    let reset = StrategyState::initialize(StrategyConfig::Reset { a: 0.10, r: 0.05 }, p0, budget)?;
    let held = reset.positions()[0].reserves_at(2100.0);
    let after = reset.on_close(2100.0)?;
    let [below, above] = after.positions() else {
        return Err(CliError { code: 1, message: "reset did not produce two positions".into() });
    };

    Ok(vec![
        Check { label: "L, range 2000 +/-10%", computed: l_narrow.get(), reference: 240.3 },
        Check { label: "L, range 2000 +/-20%", computed: l_wide.get(), reference: 128.3 },
        Check { label: "LP A value at 1900", computed: value_at(l_narrow, &narrow, 1900.0), reference: 967.63 },
        Check { label: "LP B value at 1900", computed: value_at(l_wide, &wide, 1900.0), reference: 971.81 },
        Check {
            label: "fee leverage L(10%)/L(20%)",
            computed: l_narrow.get() / l_wide.get(),
            reference: 1.875,
        },
        Check { label: "reset: token Y at 2100", computed: held.y, reference: 765.06 },
        Check { label: "reset: token X value at 2100", computed: held.x * 2100.0, reference: 252.87 },
        Check { label: "reset: new range lower", computed: below.range.lower(), reference: 1909.0 },
        Check { label: "reset: new range upper", computed: above.range.upper(), reference: 2310.0 },
        Check { label: "reset: L on [1909, 2100]", computed: below.liquidity.get(), reference: 359.0 },
        Check { label: "reset: L on [2100, 2310]", computed: above.liquidity.get(), reference: 119.0 },
    ])
}

pub fn run() -> Result<Report, CliError> {
    let checks = checks()?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<30} {:>12} {:>12} {:>9}  status",
        "check", "computed", "reference", "rel.err"
    );
    for c in &checks {
        let _ = writeln!(
            text,
            "{:<30} {:>12.4} {:>12.4} {:>8.3}%  {}",
            c.label,
            c.computed,
            c.reference,
            100.0 * c.rel_error(),
            if c.passes() { "PASS" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.passes()).count();
    let _ = writeln!(
        text,
        "{} of {} checks passed (tolerance {}%)",
        checks.len() - failed,
        checks.len(),
        100.0 * TOLERANCE
    );
    Ok(Report { text, code: if failed == 0 { 0 } else { 1 } })
}
