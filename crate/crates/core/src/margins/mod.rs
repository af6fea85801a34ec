//! Margin levels under the Gaussian, extreme-value, historical and GARCH
//! models, the scaling rules that turn intraday margins into daily ones,
//! and the report grids built from them.
//!
//! Margins are positive magnitudes in percent of the nominal position. A
//! long position reads the left tail, a short position the right tail.

mod compare;
mod monitor;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::descstats::nearest_rank;
use crate::error::{Error, Result};
use crate::marketdata::Frequency;
use crate::normal;
use crate::tails::TailSide;

pub use compare::{compare_scaled_vs_daily, one_sample_t_test, ComparisonReport, ComparisonRow, ScalingHorizons};
pub use monitor::{intraday_call_monitor, MarginCall, DEFAULT_CALL_THRESHOLD};
pub use table::{margin_table, MarginCell, MarginReport, TableOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Long,
    Short,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Long, Side::Short];

    /// Tail of the return distribution the position is exposed to.
    pub fn tail(self) -> TailSide {
        match self {
            Side::Long => TailSide::Left,
            Side::Short => TailSide::Right,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Long => "long",
            Side::Short => "short",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Gaussian,
    Evt,
    Historical,
    Garch,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Gaussian, Model::Evt, Model::Historical, Model::Garch];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Gaussian => "gaussian",
            Model::Evt => "evt",
            Model::Historical => "historical",
            Model::Garch => "garch",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Model::Gaussian),
            "evt" | "extreme_value" => Ok(Model::Evt),
            "historical" => Ok(Model::Historical),
            "garch" => Ok(Model::Garch),
            other => Err(Error::InvalidInput(format!("unknown model {other:?}"))),
        }
    }
}

/// How many intraday intervals make up one day when scaling.
///
/// `Session` counts trading intervals only (113 five-minute, 9 hourly);
/// `Calendar` counts the whole day (288 five-minute, 24 hourly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingPreset {
    Session,
    Calendar,
}

impl ScalingPreset {
    pub fn horizon(self, frequency: Frequency) -> f64 {
        match (self, frequency) {
            (_, Frequency::Daily) => 1.0,
            (ScalingPreset::Session, Frequency::FiveMinute) => 113.0,
            (ScalingPreset::Session, Frequency::Hourly) => 9.0,
            (ScalingPreset::Calendar, Frequency::FiveMinute) => 288.0,
            (ScalingPreset::Calendar, Frequency::Hourly) => 24.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingPreset::Session => "session",
            ScalingPreset::Calendar => "calendar",
        }
    }
}

impl fmt::Display for ScalingPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalingPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "session" => Ok(ScalingPreset::Session),
            "calendar" => Ok(ScalingPreset::Calendar),
            other => Err(Error::InvalidInput(format!("unknown scaling preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginSpec {
    pub coverage: f64,
    pub horizon: f64,
    pub side: Side,
    pub model: Model,
}

impl MarginSpec {
    pub fn new(coverage: f64, horizon: f64, side: Side, model: Model) -> Result<Self> {
        let spec = Self { coverage, horizon, side, model };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coverage > 0.5 && self.coverage < 1.0) {
            return Err(Error::InvalidInput(format!("coverage {} outside (0.5, 1)", self.coverage)));
        }
        if !(self.horizon >= 1.0) {
            return Err(Error::InvalidInput(format!("horizon {} below 1", self.horizon)));
        }
        Ok(())
    }

    /// Daily grid: every model, coverage and side at horizon 1.
    pub fn grid(coverages: &[f64], models: &[Model]) -> Result<Vec<MarginSpec>> {
        let mut specs = Vec::new();
        for &side in &Side::BOTH {
            for &coverage in coverages {
                for &model in models {
                    specs.push(MarginSpec::new(coverage, 1.0, side, model)?);
                }
            }
        }
        Ok(specs)
    }
}

/// `|mu T + z sigma sqrt(T)|` with `z` the normal quantile at `1 - p`
/// (long) or `p` (short).
pub fn normal_margin(mu: f64, sigma: f64, coverage: f64, horizon: f64, side: Side) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidInput(format!("coverage {coverage} outside (0, 1)")));
    }
    if !(horizon >= 1.0) {
        return Err(Error::InvalidInput(format!("horizon {horizon} below 1")));
    }
    // z_{1-p} = -z_p; using the symmetry keeps long and short identical when mu = 0
    let z = match side {
        Side::Long => -normal::quantile(coverage),
        Side::Short => normal::quantile(coverage),
    };
    Ok((mu * horizon + z * sigma * horizon.sqrt()).abs())
}

/// Gaussian margin from the unconditional mean and standard deviation.
pub fn gaussian_margin(mu: f64, sigma: f64, coverage: f64, horizon: f64, side: Side) -> Result<f64> {
    normal_margin(mu, sigma, coverage, horizon, side)
}

/// `sqrt(T) * ml_1`.
pub fn sqrt_scale(ml_1: f64, horizon: f64) -> f64 {
    horizon.sqrt() * ml_1
}

/// Losses seen by a position: negated returns for long, returns for short.
pub fn losses(values: &[f64], side: Side) -> Vec<f64> {
    match side {
        Side::Long => values.iter().map(|x| -x).collect(),
        Side::Short => values.to_vec(),
    }
}

/// In-sample quantile of the side's losses: the smallest order statistic
/// whose rank fraction reaches `coverage`.
///
/// Unavailable when `n (1 - p) < 1`, i.e. the quantile would sit beyond the
/// sample.
pub fn historical_margin(values: &[f64], coverage: f64, side: Side) -> Result<f64> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidInput(format!("coverage {coverage} outside (0, 1)")));
    }
    let n = values.len();
    if (n as f64) * (1.0 - coverage) < 1.0 - 1e-9 {
        return Err(Error::Unavailable(format!(
            "coverage {coverage} needs at least {:.0} observations, have {n}",
            (1.0 / (1.0 - coverage)).ceil()
        )));
    }
    let mut sorted = losses(values, side);
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[nearest_rank(n, coverage) - 1].abs())
}

/// Average number of trading days between exceedances, `1 / (1 - p)`.
pub fn waiting_period(coverage: f64) -> f64 {
    1.0 / (1.0 - coverage)
}

/// Waiting period rounded to whole days, as displayed in the tables.
pub fn waiting_days(coverage: f64) -> u64 {
    waiting_period(coverage).round() as u64
}

/// Coverage probability whose waiting period is `days`, `1 - 1/d`.
pub fn coverage_for_waiting_days(days: f64) -> f64 {
    1.0 - 1.0 / days
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_table_inputs() {
        let long = gaussian_margin(-0.03, 1.30, 0.95, 1.0, Side::Long).unwrap();
        let short = gaussian_margin(-0.03, 1.30, 0.95, 1.0, Side::Short).unwrap();
        assert!((long - 2.17).abs() < 0.005, "{long}");
        assert!((short - 2.11).abs() < 0.005, "{short}");
        assert!(gaussian_margin(0.0, 1.0, 0.5, 1.0, Side::Long).unwrap().abs() < 1e-12);
        assert!(gaussian_margin(0.0, 0.0, 0.95, 1.0, Side::Long).is_err());
    }

    #[test]
    fn sqrt_scaling() {
        assert_eq!(sqrt_scale(1.3, 1.0), 1.3);
        assert_eq!(sqrt_scale(1.3, 4.0), 2.6);
        let five_min = gaussian_margin(0.0, 0.11, 0.95, 1.0, Side::Long).unwrap();
        assert!((sqrt_scale(five_min, 288.0) - 3.07).abs() < 0.01);
    }

    #[test]
    fn historical_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(historical_margin(&v, 0.95, Side::Short).unwrap(), 95.0);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert_eq!(historical_margin(&neg, 0.95, Side::Long).unwrap(), 95.0);
        let daily = vec![0.1; 247];
        assert!(matches!(historical_margin(&daily, 0.998, Side::Long), Err(Error::Unavailable(_))));
        // 100 observations resolve the 99% quantile
        assert_eq!(historical_margin(&v, 0.99, Side::Short).unwrap(), 99.0);
    }

    #[test]
    fn waiting_periods() {
        assert_eq!(waiting_days(0.95), 20);
        assert_eq!(waiting_days(0.99), 100);
        assert_eq!(waiting_days(0.996), 250);
        assert_eq!(waiting_days(0.998), 500);
        assert_eq!(waiting_days(0.5), 2);
        assert!((coverage_for_waiting_days(20.0) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(MarginSpec::new(0.5, 1.0, Side::Long, Model::Gaussian).is_err());
        assert!(MarginSpec::new(0.95, 0.5, Side::Long, Model::Gaussian).is_err());
        assert_eq!(MarginSpec::grid(&[0.95, 0.99], &Model::ALL).unwrap().len(), 16);
    }
}
