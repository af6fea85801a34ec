use std::collections::BTreeSet;

use chrono::{NaiveDate, NaiveTime};

use super::TickSeries;
use crate::error::{Error, Result};

/// Exchange holidays, half days and the session window.
///
/// The default session runs 08:00 to 17:25, which gives 113 five-minute
/// and 9 hourly intervals per complete day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingCalendar {
    pub full_holidays: BTreeSet<NaiveDate>,
    pub half_days: BTreeSet<NaiveDate>,
    pub session_open: NaiveTime,
    pub session_close: NaiveTime,
}

impl Default for TradingCalendar {
    fn default() -> Self {
        Self {
            full_holidays: BTreeSet::new(),
            half_days: BTreeSet::new(),
            session_open: NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
            session_close: NaiveTime::from_hms_opt(17, 25, 0).unwrap(),
        }
    }
}

impl TradingCalendar {
    pub fn validate(&self) -> Result<()> {
        if self.session_open >= self.session_close {
            return Err(Error::InvalidInput("session_open must precede session_close".into()));
        }
        if let Some(d) = self.full_holidays.intersection(&self.half_days).next() {
            return Err(Error::InvalidInput(format!("{d} is both a holiday and a half day")));
        }
        Ok(())
    }

    pub fn is_excluded(&self, date: NaiveDate) -> bool {
        self.full_holidays.contains(&date) || self.half_days.contains(&date)
    }

    pub fn in_session(&self, time: NaiveTime) -> bool {
        self.session_open <= time && time <= self.session_close
    }

    /// Parses the declarative calendar file.
    ///
    /// ```text
    /// # comments start with '#'
    /// session_open = 08:00
    /// session_close = 17:25
    /// full_holidays = 2000-12-25, 2000-12-26
    /// half_days = 2000-12-22
    /// ```
    ///
    /// List keys may be repeated; their dates accumulate.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cal = TradingCalendar::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {body:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "session_open" | "session_close" => {
                    let t = NaiveTime::parse_from_str(value, "%H:%M")
                        .map_err(|_| err(format!("bad time {value:?}, expected HH:MM")))?;
                    if key == "session_open" {
                        cal.session_open = t;
                    } else {
                        cal.session_close = t;
                    }
                }
                "full_holidays" | "half_days" => {
                    let set = if key == "full_holidays" { &mut cal.full_holidays } else { &mut cal.half_days };
                    for d in value.split(',').map(str::trim).filter(|d| !d.is_empty()) {
                        let date = NaiveDate::parse_from_str(d, "%Y-%m-%d")
                            .map_err(|_| err(format!("bad date {d:?}, expected YYYY-MM-DD")))?;
                        set.insert(date);
                    }
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        cal.validate()?;
        Ok(cal)
    }
}

/// Drops ticks on holidays and half days and ticks outside the session window.
pub fn filter_calendar(ticks: &TickSeries, cal: &TradingCalendar) -> TickSeries {
    let kept = ticks
        .ticks()
        .iter()
        .filter(|t| !cal.is_excluded(t.date()) && cal.in_session(t.time()))
        .cloned()
        .collect();
    TickSeries::from_vec_unchecked(kept)
}
