use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::Side;
use crate::error::{Error, Result};

/// Share of the margin a position may lose intraday before a call.
pub const DEFAULT_CALL_THRESHOLD: f64 = 0.65;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCall {
    pub side: Side,
    pub timestamp: NaiveDateTime,
    /// Percent log change from the first price of the path.
    pub move_pct: f64,
    pub trigger_pct: f64,
}

/// Scans one session's price path and reports the first time the
/// cumulative move from the opening price uses up `threshold` of the long
/// (downward) or short (upward) margin. At most one call per side.
pub fn intraday_call_monitor(
    path: &[(NaiveDateTime, f64)],
    long_margin: f64,
    short_margin: f64,
    threshold: f64,
) -> Result<Vec<MarginCall>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidInput(format!("call threshold {threshold} outside (0, 1]")));
    }
    if !(long_margin > 0.0 && short_margin > 0.0) {
        return Err(Error::InvalidInput("margins must be positive".into()));
    }
    let Some(&(_, open)) = path.first() else {
        return Ok(Vec::new());
    };
    if path.iter().any(|&(_, p)| !(p > 0.0)) {
        return Err(Error::InvalidInput("prices must be positive".into()));
    }
    let long_trigger = threshold * long_margin;
    let short_trigger = threshold * short_margin;
    let mut calls = Vec::new();
    let (mut long_called, mut short_called) = (false, false);
    for &(ts, price) in path {
        let change = 100.0 * (price / open).ln();
        if !long_called && change <= -long_trigger {
            long_called = true;
            calls.push(MarginCall { side: Side::Long, timestamp: ts, move_pct: change, trigger_pct: long_trigger });
        }
        if !short_called && change >= short_trigger {
            short_called = true;
            calls.push(MarginCall { side: Side::Short, timestamp: ts, move_pct: change, trigger_pct: short_trigger });
        }
        if long_called && short_called {
            break;
        }
    }
    Ok(calls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn at(h: u32, m: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2024, 3, 4).unwrap().and_hms_opt(h, m, 0).unwrap()
    }

    #[test]
    fn call_fires_once_past_trigger() {
        let path = vec![
            (at(8, 0), 100.0),
            (at(9, 0), 100.0 * (-0.0125f64).exp()),
            (at(10, 0), 100.0 * (-0.0131f64).exp()),
            (at(11, 0), 100.0 * (-0.02f64).exp()),
        ];
        let calls = intraday_call_monitor(&path, 2.0, 2.0, DEFAULT_CALL_THRESHOLD).unwrap();
        assert_eq!(calls.len(), 1);
        assert_eq!(calls[0].side, Side::Long);
        assert_eq!(calls[0].timestamp, at(10, 0));
        assert!((calls[0].move_pct + 1.31).abs() < 1e-9);
        assert!((calls[0].trigger_pct - 1.3).abs() < 1e-12);
    }

    #[test]
    fn both_sides_and_quiet_days() {
        let path = vec![(at(8, 0), 100.0), (at(9, 0), 102.0), (at(10, 0), 97.0)];
        let calls = intraday_call_monitor(&path, 2.0, 2.0, 0.65).unwrap();
        assert_eq!(calls.iter().map(|c| c.side).collect::<Vec<_>>(), vec![Side::Short, Side::Long]);
        let near = vec![(at(8, 0), 100.0), (at(9, 0), 100.0 * (-0.0129f64).exp())];
        assert!(intraday_call_monitor(&near, 2.0, 2.0, 0.65).unwrap().is_empty());
        let up = vec![(at(8, 0), 100.0), (at(9, 0), 100.0 * 0.0131f64.exp())];
        let calls = intraday_call_monitor(&up, 2.0, 2.0, 0.65).unwrap();
        assert_eq!((calls.len(), calls[0].side), (1, Side::Short));
        let quiet = vec![(at(8, 0), 100.0), (at(9, 0), 100.5)];
        assert!(intraday_call_monitor(&quiet, 2.0, 2.0, 0.65).unwrap().is_empty());
        assert!(intraday_call_monitor(&[], 2.0, 2.0, 0.65).unwrap().is_empty());
    }
}
