use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::table::{margin_table, MarginReport, TableOptions};
use super::{sqrt_scale, waiting_days, MarginSpec, Model, ScalingPreset, Side};
use crate::descstats::{mean, std_dev, TestResult};
use crate::error::{Error, Result};
use crate::marketdata::ReturnSeries;
use crate::tails::{estimate_tail, feller_scale};

/// Number of five-minute and hourly intervals per day used for scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingHorizons {
    pub five_minute: f64,
    pub hourly: f64,
}

impl ScalingHorizons {
    pub fn from_preset(preset: ScalingPreset) -> Self {
        use crate::marketdata::Frequency;
        Self {
            five_minute: preset.horizon(Frequency::FiveMinute),
            hourly: preset.horizon(Frequency::Hourly),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: Model,
    pub coverage: f64,
    pub waiting_days: u64,
    pub side: Side,
    pub scaled_5min: Option<f64>,
    pub scaled_1h: Option<f64>,
    /// Mean of the anchored daily margins; `None` if any of them is missing.
    pub daily_mean: Option<f64>,
    pub daily_count: usize,
    pub t_5min: Option<TestResult>,
    pub t_1h: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scaling_preset: Option<ScalingPreset>,
    pub horizons: ScalingHorizons,
    pub rows: Vec<ComparisonRow>,
    /// Per-anchor daily margins the reference means were taken from.
    pub daily: MarginReport,
}

/// Two-sided one-sample t-test of `mean(samples) == mu0`.
pub fn one_sample_t_test(samples: &[f64], mu0: f64) -> Result<TestResult> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let m = mean(samples);
    let sd = std_dev(samples);
    let diff = m - mu0;
    let (t, p) = if sd > 0.0 {
        let t = diff / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        (t, 2.0 * dist.sf(t.abs()))
    } else if diff == 0.0 {
        (0.0, 1.0)
    } else {
        (diff.signum() * f64::INFINITY, 0.0)
    };
    Ok(TestResult {
        test_name: "one_sample_t".into(),
        statistic: t,
        p_value: p,
        parameters: vec![("mu0".into(), mu0), ("dof".into(), (n - 1) as f64)],
    })
}

/// Scales a one-interval margin to a day by the model's aggregation rule.
/// Historical margins have no such rule and come back `None`.
fn scaled_margin(series: &ReturnSeries, spec: &MarginSpec, horizon: f64, opts: &TableOptions) -> Option<f64> {
    if spec.model == Model::Historical {
        return None;
    }
    let base = MarginSpec { horizon: 1.0, ..*spec };
    let report = margin_table(std::slice::from_ref(series), &[base], opts);
    let ml_1 = report.cells[0].margin?;
    match spec.model {
        Model::Gaussian | Model::Garch => Some(sqrt_scale(ml_1, horizon)),
        Model::Evt => {
            let est = estimate_tail(&series.values, spec.side.tail(), &opts.tail).ok()?;
            Some(feller_scale(ml_1, horizon, est.alpha))
        }
        Model::Historical => None,
    }
}

/// Compares intraday margins scaled to one day with the average of the
/// margins computed directly on the anchored daily series.
pub fn compare_scaled_vs_daily(
    five_min: Option<&ReturnSeries>,
    hourly: Option<&ReturnSeries>,
    anchored: &[ReturnSeries],
    coverages: &[f64],
    models: &[Model],
    horizons: ScalingHorizons,
    opts: &TableOptions,
) -> Result<ComparisonReport> {
    if anchored.is_empty() {
        return Err(Error::InvalidInput("no anchored daily series to compare against".into()));
    }
    if !(horizons.five_minute >= 1.0 && horizons.hourly >= 1.0) {
        return Err(Error::InvalidInput("scaling horizons must be at least 1".into()));
    }
    let specs = MarginSpec::grid(coverages, models)?;
    let daily = margin_table(anchored, &specs, opts);

    let mut rows = Vec::with_capacity(specs.len());
    for spec in &specs {
        let daily_margins: Vec<f64> = daily
            .cells
            .iter()
            .filter(|c| c.model == spec.model && c.side == spec.side && c.coverage == spec.coverage)
            .filter_map(|c| c.margin)
            .collect();
        let complete = daily_margins.len() == anchored.len();
        let daily_mean = complete.then(|| mean(&daily_margins));

        let scaled_5min = five_min.and_then(|s| scaled_margin(s, spec, horizons.five_minute, opts));
        let scaled_1h = hourly.and_then(|s| scaled_margin(s, spec, horizons.hourly, opts));
        let test = |scaled: Option<f64>| {
            if !complete {
                return None;
            }
            scaled.and_then(|m| one_sample_t_test(&daily_margins, m).ok())
        };

        rows.push(ComparisonRow {
            model: spec.model,
            coverage: spec.coverage,
            waiting_days: waiting_days(spec.coverage),
            side: spec.side,
            scaled_5min,
            scaled_1h,
            daily_mean,
            daily_count: daily_margins.len(),
            t_5min: test(scaled_5min),
            t_1h: test(scaled_1h),
        });
    }
    Ok(ComparisonReport { scaling_preset: opts.scaling_preset, horizons, rows, daily })
}
