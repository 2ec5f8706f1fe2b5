//! Hourly pool data: CSV ingestion, validation, and daily fee-return statistics.
//!
//! CSV layout (header required):
//!
//! ```text
//! timestamp,price,volume,pool_liquidity,tvl
//! 1622505600,2706.1,12500000,1.9e16,
//! ```
//!
//! `timestamp` is Unix seconds (UTC) and must be strictly increasing. `tvl` may
//! be empty or the column may be absent; it is only needed for daily returns.
//! Row numbers in errors count data rows from 1, excluding the header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate};

use crate::clmath::PairProfile;
use crate::engine::{check_fee_rate, validate_bars, HourlyBar};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["timestamp", "price", "volume", "pool_liquidity", "tvl"];

const SECONDS_PER_DAY: i64 = 86_400;

/// A validated, timestamp-ordered series of hourly bars from one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct BarSeries {
    pub pair: PairProfile,
    pub fee_rate: f64,
    pub bars: Vec<HourlyBar>,
    pub source_label: String,
}

impl BarSeries {
    pub fn new(
        pair: PairProfile,
        fee_rate: f64,
        bars: Vec<HourlyBar>,
        source_label: impl Into<String>,
    ) -> Result<Self> {
        check_fee_rate(fee_rate)?;
        validate_bars(&bars)?;
        Ok(Self {
            pair,
            fee_rate,
            bars,
            source_label: source_label.into(),
        })
    }

    /// Bars whose UTC date lies in `[from, to]`; either end may be open.
    pub fn window(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<BarSeries> {
        if let (Some(from), Some(to)) = (from, to) {
            if from > to {
                return Err(Error::usage(format!("window start {from} is after end {to}")));
            }
        }
        let bars: Vec<HourlyBar> = self
            .bars
            .iter()
            .filter(|bar| {
                let day = utc_date(bar.timestamp);
                from.is_none_or(|f| day >= f) && to.is_none_or(|t| day <= t)
            })
            .copied()
            .collect();
        if bars.is_empty() {
            return Err(Error::usage("date window selects no bars"));
        }
        Ok(BarSeries {
            bars,
            ..self.clone()
        })
    }
}

/// Fee return of one UTC day, per unit of liquidity value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyReturnPoint {
    pub date: NaiveDate,
    pub lp_return: f64,
}

/// UTC calendar date of a Unix timestamp.
pub fn utc_date(timestamp: i64) -> NaiveDate {
    let days = timestamp.div_euclid(SECONDS_PER_DAY);
    DateTime::from_timestamp(days * SECONDS_PER_DAY, 0)
        .map(|dt| dt.date_naive())
        .unwrap_or(NaiveDate::MIN)
}

/// Reads and validates a CSV bar series from any reader.
pub fn load_bars<R: Read>(
    source: R,
    pair: PairProfile,
    fee_rate: f64,
    source_label: impl Into<String>,
) -> Result<BarSeries> {
    check_fee_rate(fee_rate)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| Error::data(None, format!("cannot read header: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut required = [0usize; 4];
    for (slot, name) in required.iter_mut().zip(&CSV_HEADER[..4]) {
        *slot = column(name)
            .ok_or_else(|| Error::data(None, format!("missing column '{name}'")))?;
    }
    let [ts_col, price_col, volume_col, liquidity_col] = required;
    let tvl_col = column("tvl");

    let mut bars = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::data(Some(row), e.to_string()))?;
        let field = |col: usize, name: &str| -> Result<&str> {
            record
                .get(col)
                .ok_or_else(|| Error::data(Some(row), format!("missing value for '{name}'")))
        };
        let number = |col: usize, name: &str| -> Result<f64> {
            let raw = field(col, name)?;
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::data(Some(row), format!("{name} '{raw}' is not a number")))?;
            if !v.is_finite() {
                return Err(Error::data(Some(row), format!("{name} '{raw}' is not finite")));
            }
            Ok(v)
        };

        let raw_ts = field(ts_col, "timestamp")?;
        let timestamp: i64 = raw_ts.parse().map_err(|_| {
            Error::data(Some(row), format!("timestamp '{raw_ts}' is not an integer"))
        })?;
        let tvl = match tvl_col {
            Some(col) if !field(col, "tvl")?.is_empty() => Some(number(col, "tvl")?),
            _ => None,
        };
        let bar = HourlyBar {
            timestamp,
            price: number(price_col, "price")?,
            volume: number(volume_col, "volume")?,
            pool_liquidity: number(liquidity_col, "pool_liquidity")?,
            tvl,
        };
        bar.validate(row)?;
        if let Some(prev) = bars.last().map(|b: &HourlyBar| b.timestamp) {
            if timestamp <= prev {
                return Err(Error::data(
                    Some(row),
                    format!("timestamps not increasing ({timestamp} follows {prev})"),
                ));
            }
        }
        bars.push(bar);
    }
    if bars.is_empty() {
        return Err(Error::data(None, "no data rows"));
    }
    BarSeries::new(pair, fee_rate, bars, source_label)
}

/// Loads a CSV file; the file path becomes the source label.
pub fn load_bars_from_path(path: &Path, pair: PairProfile, fee_rate: f64) -> Result<BarSeries> {
    let file = File::open(path).map_err(|e| {
        Error::data(None, format!("cannot open {}: {e}", path.display()))
    })?;
    load_bars(file, pair, fee_rate, path.display().to_string())
}

/// Writes the series in the ingestion format. Floats use shortest
/// round-trip formatting, so reloading is lossless.
pub fn write_bars<W: Write>(series: &BarSeries, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(CSV_HEADER).map_err(io)?;
    for bar in &series.bars {
        writer
            .write_record([
                bar.timestamp.to_string(),
                bar.price.to_string(),
                bar.volume.to_string(),
                bar.pool_liquidity.to_string(),
                bar.tvl.map(|t| t.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

/// Daily fee volume over the day's closing TVL, one point per UTC day present.
pub fn daily_fee_returns(series: &BarSeries) -> Result<Vec<DailyReturnPoint>> {
    let mut points: Vec<DailyReturnPoint> = Vec::new();
    let mut current: Option<(NaiveDate, f64, f64, usize)> = None;

    let mut close_day = |(date, volume, tvl, row): (NaiveDate, f64, f64, usize)| -> Result<()> {
        if tvl <= 0.0 {
            return Err(Error::data(Some(row), format!("tvl must be positive on {date}")));
        }
        points.push(DailyReturnPoint {
            date,
            lp_return: volume * series.fee_rate / tvl,
        });
        Ok(())
    };

    for (i, bar) in series.bars.iter().enumerate() {
        let row = i + 1;
        let tvl = bar.tvl.ok_or_else(|| {
            Error::usage(format!(
                "row {row} has no tvl; daily returns need the tvl column filled in"
            ))
        })?;
        let date = utc_date(bar.timestamp);
        current = match current {
            Some((day, volume, _, _)) if day == date => Some((day, volume + bar.volume, tvl, row)),
            Some(done) => {
                close_day(done)?;
                Some((date, bar.volume, tvl, row))
            }
            None => Some((date, bar.volume, tvl, row)),
        };
    }
    if let Some(done) = current {
        close_day(done)?;
    }
    Ok(points)
}

/// Mean daily return over `[start, end]`, both inclusive.
pub fn average_daily_return(
    points: &[DailyReturnPoint],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<f64> {
    if start > end {
        return Err(Error::usage(format!("window start {start} is after end {end}")));
    }
    let selected: Vec<f64> = points
        .iter()
        .filter(|p| p.date >= start && p.date <= end)
        .map(|p| p.lp_return)
        .collect();
    if selected.is_empty() {
        return Err(Error::usage(format!("no daily returns between {start} and {end}")));
    }
    Ok(selected.iter().sum::<f64>() / selected.len() as f64)
}
