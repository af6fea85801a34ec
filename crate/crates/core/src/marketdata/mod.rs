//! Tick ingestion, calendar filtering, contract rolling and resampling.

mod calendar;
mod resample;
mod roll;
mod ticks;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calendar::{filter_calendar, TradingCalendar};
pub use resample::{intervals_per_day, resample_anchored_daily, resample_intraday, Resampled};
pub use roll::{active_months, roll_contracts, Rolled};
pub use ticks::{parse_ticks, write_ticks};

/// Year-month tag of a futures delivery month, written `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DeliveryMonth {
    pub year: i32,
    pub month: u32,
}

impl DeliveryMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidInput(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }
}

impl fmt::Display for DeliveryMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for DeliveryMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad delivery month {s:?}, expected YYYY-MM"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        Self::new(year, month).map_err(|_| bad())
    }
}

impl TryFrom<String> for DeliveryMonth {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DeliveryMonth> for String {
    fn from(m: DeliveryMonth) -> String {
        m.to_string()
    }
}

/// A single trade.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub timestamp: NaiveDateTime,
    /// Trade price in index points, strictly positive.
    pub price: f64,
    pub volume: u64,
    pub delivery_month: DeliveryMonth,
}

impl Tick {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date()
    }

    pub fn time(&self) -> NaiveTime {
        self.timestamp.time()
    }
}

/// Trades for one or more delivery months, in input order.
///
/// Prices are strictly positive and timestamps never decrease within a
/// delivery month.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickSeries {
    ticks: Vec<Tick>,
}

impl TickSeries {
    pub fn new(ticks: Vec<Tick>) -> Result<Self> {
        let mut last: BTreeMap<DeliveryMonth, NaiveDateTime> = BTreeMap::new();
        for (i, t) in ticks.iter().enumerate() {
            if !(t.price.is_finite() && t.price > 0.0) {
                return Err(Error::InvalidInput(format!("tick {i}: price must be positive")));
            }
            if let Some(prev) = last.insert(t.delivery_month, t.timestamp) {
                if t.timestamp < prev {
                    return Err(Error::InvalidInput(format!(
                        "tick {i}: timestamp decreases within delivery month {}",
                        t.delivery_month
                    )));
                }
            }
        }
        Ok(Self { ticks })
    }

    pub(crate) fn from_vec_unchecked(ticks: Vec<Tick>) -> Self {
        Self { ticks }
    }

    pub fn ticks(&self) -> &[Tick] {
        &self.ticks
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Distinct delivery months, ascending.
    pub fn delivery_months(&self) -> Vec<DeliveryMonth> {
        let mut months: Vec<_> = self.ticks.iter().map(|t| t.delivery_month).collect();
        months.sort();
        months.dedup();
        months
    }

    /// Distinct trading dates, ascending.
    pub fn days(&self) -> Vec<NaiveDate> {
        self.by_day().into_keys().collect()
    }

    /// Ticks grouped by calendar date, each group in input order.
    pub fn by_day(&self) -> BTreeMap<NaiveDate, Vec<&Tick>> {
        let mut days: BTreeMap<NaiveDate, Vec<&Tick>> = BTreeMap::new();
        for t in &self.ticks {
            days.entry(t.date()).or_default().push(t);
        }
        days
    }
}

/// Sampling frequency of a return series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    FiveMinute,
    Hourly,
    Daily,
}

impl Frequency {
    /// Interval length in minutes for intraday frequencies.
    pub fn interval_minutes(self) -> Option<i64> {
        match self {
            Frequency::FiveMinute => Some(5),
            Frequency::Hourly => Some(60),
            Frequency::Daily => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::FiveMinute => "5min",
            Frequency::Hourly => "1h",
            Frequency::Daily => "1d",
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "5min" | "5m" | "5-minute" | "five_minute" => Ok(Frequency::FiveMinute),
            "1h" | "60min" | "1-hour" | "hourly" => Ok(Frequency::Hourly),
            "1d" | "daily" | "1-day" => Ok(Frequency::Daily),
            other => Err(Error::InvalidInput(format!("unknown frequency {other:?}"))),
        }
    }
}

/// Log price changes in percent at one frequency.
///
/// `day_index[i]` is the ordinal of the trading day the i-th value ends on
/// and `boundary[i]` the time-of-day at which it ends (`None` for series
/// that were not built from ticks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub frequency: Frequency,
    pub anchor: Option<NaiveTime>,
    pub values: Vec<f64>,
    pub day_index: Vec<usize>,
    pub boundary: Vec<Option<NaiveTime>>,
}

impl ReturnSeries {
    /// Wraps bare values, one per "day".
    pub fn from_values(frequency: Frequency, values: Vec<f64>) -> Self {
        let n = values.len();
        Self {
            frequency,
            anchor: None,
            values,
            day_index: (0..n).collect(),
            boundary: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Short label used as the series key in reports, e.g. `09:00` or `5min`.
    pub fn label(&self) -> String {
        match (self.frequency, self.anchor) {
            (Frequency::Daily, Some(a)) => a.format("%H:%M").to_string(),
            (f, _) => f.as_str().to_string(),
        }
    }
}

/// Non-fatal data issues found while rolling or resampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// The active delivery month had no trades on this date.
    RollGap { date: NaiveDate, month: DeliveryMonth },
    /// No trade at or before the anchor on this date; adjacent day-pairs dropped.
    MissingAnchorPrice { date: NaiveDate, anchor: NaiveTime },
    /// An intraday day produced fewer returns than the session grid allows.
    IncompleteDay { date: NaiveDate, got: usize, expected: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::RollGap { date, month } => {
                write!(f, "{date}: no trades in active month {month}, day skipped")
            }
            Warning::MissingAnchorPrice { date, anchor } => {
                write!(f, "{date}: no trade at or before {}, day-pair omitted", anchor.format("%H:%M"))
            }
            Warning::IncompleteDay { date, got, expected } => {
                write!(f, "{date}: {got} of {expected} intraday returns available")
            }
        }
    }
}

/// Price of the last trade at or before `at`, ties resolved to the later input row.
pub(crate) fn last_price_at_or_before(day: &[&Tick], at: NaiveTime) -> Option<f64> {
    let mut best: Option<&Tick> = None;
    for t in day {
        if t.time() <= at && best.is_none_or(|b| t.timestamp >= b.timestamp) {
            best = Some(t);
        }
    }
    best.map(|t| t.price)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delivery_month_roundtrip() {
        let m: DeliveryMonth = "2000-03".parse().unwrap();
        assert_eq!(m, DeliveryMonth { year: 2000, month: 3 });
        assert_eq!(m.to_string(), "2000-03");
        assert!("2000-13".parse::<DeliveryMonth>().is_err());
        assert!("200003".parse::<DeliveryMonth>().is_err());
        assert_eq!(serde_json::to_string(&m).unwrap(), "\"2000-03\"");
        assert_eq!(serde_json::from_str::<DeliveryMonth>("\"2000-03\"").unwrap(), m);
        assert!(serde_json::from_str::<DeliveryMonth>("\"2000-3\"").is_err());
    }

    #[test]
    fn rejects_decreasing_timestamps_within_month() {
        let m = DeliveryMonth::new(2000, 3).unwrap();
        let ts = |s: &str| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").unwrap();
        let ticks = vec![
            Tick { timestamp: ts("2000-03-06T10:05:00"), price: 1.0, volume: 1, delivery_month: m },
            Tick { timestamp: ts("2000-03-06T10:04:00"), price: 1.0, volume: 1, delivery_month: m },
        ];
        assert!(TickSeries::new(ticks).is_err());
    }

    #[test]
    fn last_price_prefers_latest_then_last_row() {
        let m = DeliveryMonth::new(2000, 3).unwrap();
        let ts = |s: &str| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").unwrap();
        let a = Tick { timestamp: ts("2000-03-06T09:58:00"), price: 1.0, volume: 1, delivery_month: m };
        let b = Tick { timestamp: ts("2000-03-06T09:58:00"), price: 2.0, volume: 1, delivery_month: m };
        let c = Tick { timestamp: ts("2000-03-06T10:01:00"), price: 3.0, volume: 1, delivery_month: m };
        let day = vec![&a, &b, &c];
        let ten = NaiveTime::from_hms_opt(10, 0, 0).unwrap();
        assert_eq!(last_price_at_or_before(&day, ten), Some(2.0));
        let early = NaiveTime::from_hms_opt(9, 0, 0).unwrap();
        assert_eq!(last_price_at_or_before(&day, early), None);
    }
}
