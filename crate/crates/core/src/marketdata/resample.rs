use chrono::{Duration, NaiveTime};

use super::{last_price_at_or_before, Frequency, ReturnSeries, TickSeries, TradingCalendar, Warning};
use crate::error::{Error, Result};

/// A resampled series plus the day-pairs or intervals that had to be dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub series: ReturnSeries,
    pub warnings: Vec<Warning>,
}

fn pct_log_change(from: f64, to: f64) -> f64 {
    100.0 * (to.ln() - from.ln())
}

/// Day-over-day returns measured at a fixed time of day.
///
/// The price on each day is the last trade at or before `anchor`. A day
/// without such a trade drops both day-pairs it belongs to.
pub fn resample_anchored_daily(ticks: &TickSeries, anchor: NaiveTime) -> Result<Resampled> {
    let by_day = ticks.by_day();
    if by_day.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: by_day.len() });
    }
    let mut warnings = Vec::new();
    let prices: Vec<_> = by_day
        .iter()
        .map(|(&date, day)| {
            let p = last_price_at_or_before(day, anchor);
            if p.is_none() {
                log::warn!("{date}: no trade at or before {anchor}");
                warnings.push(Warning::MissingAnchorPrice { date, anchor });
            }
            p
        })
        .collect();

    let mut series = ReturnSeries {
        frequency: Frequency::Daily,
        anchor: Some(anchor),
        values: Vec::with_capacity(prices.len() - 1),
        day_index: Vec::with_capacity(prices.len() - 1),
        boundary: Vec::with_capacity(prices.len() - 1),
    };
    for (i, pair) in prices.windows(2).enumerate() {
        if let [Some(prev), Some(cur)] = pair {
            series.values.push(pct_log_change(*prev, *cur));
            series.day_index.push(i + 1);
            series.boundary.push(Some(anchor));
        }
    }
    Ok(Resampled { series, warnings })
}

/// Interval boundaries `open, open + step, ...` that fit inside the session.
fn session_grid(cal: &TradingCalendar, minutes: i64) -> Vec<NaiveTime> {
    let step = Duration::minutes(minutes);
    let mut grid = vec![cal.session_open];
    let mut t = cal.session_open;
    loop {
        let (next, wrapped) = t.overflowing_add_signed(step);
        if wrapped != 0 || next > cal.session_close {
            break;
        }
        grid.push(next);
        t = next;
    }
    grid
}

/// Number of returns a complete day yields at `frequency` on this session.
pub fn intervals_per_day(cal: &TradingCalendar, frequency: Frequency) -> usize {
    match frequency.interval_minutes() {
        Some(m) => session_grid(cal, m).len() - 1,
        None => 1,
    }
}

/// Intraday returns on the session grid.
///
/// Boundary prices use the last trade at or before the boundary on the same
/// day; an interval whose start or end has no price is dropped, never
/// filled from the previous day.
pub fn resample_intraday(ticks: &TickSeries, cal: &TradingCalendar, frequency: Frequency) -> Result<Resampled> {
    let minutes = frequency
        .interval_minutes()
        .ok_or_else(|| Error::InvalidInput("intraday resampling needs a 5min or 1h frequency".into()))?;
    cal.validate()?;
    let grid = session_grid(cal, minutes);
    let expected = grid.len() - 1;
    if expected == 0 {
        return Err(Error::InvalidInput(format!("session shorter than one {frequency} interval")));
    }

    let mut series = ReturnSeries {
        frequency,
        anchor: None,
        values: Vec::new(),
        day_index: Vec::new(),
        boundary: Vec::new(),
    };
    let mut warnings = Vec::new();
    for (i, (&date, day)) in ticks.by_day().iter().enumerate() {
        let prices: Vec<_> = grid.iter().map(|&b| last_price_at_or_before(day, b)).collect();
        let before = series.len();
        for (j, pair) in prices.windows(2).enumerate() {
            if let [Some(prev), Some(cur)] = pair {
                series.values.push(pct_log_change(*prev, *cur));
                series.day_index.push(i);
                series.boundary.push(Some(grid[j + 1]));
            }
        }
        let got = series.len() - before;
        if got < expected {
            log::warn!("{date}: {got} of {expected} {frequency} returns");
            warnings.push(Warning::IncompleteDay { date, got, expected });
        }
    }
    Ok(Resampled { series, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::parse_ticks;

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    #[test]
    fn default_session_counts() {
        let cal = TradingCalendar::default();
        assert_eq!(intervals_per_day(&cal, Frequency::FiveMinute), 113);
        assert_eq!(intervals_per_day(&cal, Frequency::Hourly), 9);
        assert_eq!(intervals_per_day(&cal, Frequency::Daily), 1);
    }

    #[test]
    fn anchored_uses_last_trade_before_anchor() {
        let src = "2000-03-06T09:58:00,100.0,1,2000-03\n\
                   2000-03-06T10:02:00,500.0,1,2000-03\n\
                   2000-03-07T10:00:00,101.0,1,2000-03\n";
        let r = resample_anchored_daily(&parse_ticks(src.as_bytes()).unwrap(), t(10, 0)).unwrap();
        assert_eq!(r.series.len(), 1);
        assert!((r.series.values[0] - 100.0 * 1.01f64.ln()).abs() < 1e-12);
        assert!((r.series.values[0] - 0.9950).abs() < 5e-5);
    }

    #[test]
    fn anchored_missing_price_drops_pairs() {
        let src = "2000-03-06T09:00:00,100.0,1,2000-03\n\
                   2000-03-07T11:00:00,101.0,1,2000-03\n\
                   2000-03-08T09:00:00,102.0,1,2000-03\n\
                   2000-03-09T09:00:00,103.0,1,2000-03\n";
        let r = resample_anchored_daily(&parse_ticks(src.as_bytes()).unwrap(), t(10, 0)).unwrap();
        assert_eq!(r.series.len(), 1);
        assert_eq!(r.series.day_index, vec![3]);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn anchored_needs_two_days() {
        let src = "2000-03-06T09:00:00,100.0,1,2000-03\n";
        assert!(resample_anchored_daily(&parse_ticks(src.as_bytes()).unwrap(), t(10, 0)).is_err());
    }

    #[test]
    fn constant_price_gives_zero_returns() {
        let src = "2000-03-06T08:00:00,100.0,1,2000-03\n2000-03-06T12:00:00,100.0,1,2000-03\n";
        let r = resample_intraday(&parse_ticks(src.as_bytes()).unwrap(), &TradingCalendar::default(), Frequency::FiveMinute)
            .unwrap();
        assert_eq!(r.series.len(), 113);
        assert!(r.series.values.iter().all(|&v| v == 0.0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn intervals_before_first_trade_are_dropped() {
        let src = "2000-03-06T09:00:00,100.0,1,2000-03\n";
        let r = resample_intraday(&parse_ticks(src.as_bytes()).unwrap(), &TradingCalendar::default(), Frequency::Hourly)
            .unwrap();
        // boundaries 08:00..17:00, first priced boundary is 09:00
        assert_eq!(r.series.len(), 8);
        assert_eq!(r.warnings, vec![Warning::IncompleteDay {
            date: chrono::NaiveDate::from_ymd_opt(2000, 3, 6).unwrap(),
            got: 8,
            expected: 9
        }]);
    }

    #[test]
    fn daily_frequency_rejected_for_intraday() {
        let ticks = TickSeries::default();
        assert!(resample_intraday(&ticks, &TradingCalendar::default(), Frequency::Daily).is_err());
    }
}
