//! Invariant checks shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use chrono::{NaiveDate, NaiveTime};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use hfmargin::export::write_margins_csv;
use hfmargin::margins::{margin_table, sqrt_scale, MarginSpec, Model, TableOptions};
use hfmargin::marketdata::{resample_intraday, Frequency, ReturnSeries, TickSeries, TradingCalendar};
use hfmargin::synth::{student_t, TickWalk};
use hfmargin::tails::feller_scale;

pub type CheckResult = Result<(), TestCaseError>;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn walk(seed: u64, days: usize, step_sigma: f64) -> TickSeries {
    TickWalk {
        start: NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(),
        start_price: 6500.0,
        step_sigma,
        overnight_sigma: 0.8,
        step_minutes: 5,
        delivery_month: "2000-03".parse().unwrap(),
    }
    .generate(&TradingCalendar::default(), days, seed)
    .unwrap()
}

/// Heavy-tailed daily-like returns.
pub fn fat_tailed(seed: u64, n: usize, dof: f64) -> Vec<f64> {
    student_t(n, dof, seed)
}

fn last_price(ticks: &[&hfmargin::marketdata::Tick], at: NaiveTime) -> f64 {
    ticks.iter().filter(|t| t.time() <= at).last().unwrap().price
}

/// Intraday returns of each day sum to the log change between the first and
/// last grid prices of that day.
pub fn check_telescoping(seed: u64, days: usize, frequency: Frequency) -> CheckResult {
    let cal = TradingCalendar::default();
    let ticks = walk(seed, days, 0.2);
    let series = resample_intraday(&ticks, &cal, frequency).unwrap().series;
    let by_day: Vec<_> = ticks.by_day().into_values().collect();
    for (d, day) in by_day.iter().enumerate() {
        let idx: Vec<usize> = (0..series.len()).filter(|&i| series.day_index[i] == d).collect();
        prop_assert!(!idx.is_empty());
        let sum: f64 = idx.iter().map(|&i| series.values[i]).sum();
        let last = series.boundary[*idx.last().unwrap()].unwrap();
        let direct = 100.0 * (last_price(day, last) / last_price(day, cal.session_open)).ln();
        prop_assert!((sum - direct).abs() < 1e-9, "day {d}: {sum} vs {direct}");
    }
    Ok(())
}

fn report_for(values: Vec<f64>, coverages: &[f64]) -> hfmargin::margins::MarginReport {
    report_for_models(values, coverages, &Model::ALL)
}

fn report_for_models(values: Vec<f64>, coverages: &[f64], models: &[Model]) -> hfmargin::margins::MarginReport {
    let series = ReturnSeries::from_values(Frequency::Daily, values);
    let specs = MarginSpec::grid(coverages, models).unwrap();
    margin_table(&[series], &specs, &TableOptions::default())
}

/// Closed-form models: Gaussian, extreme value and historical.
pub const CLOSED_FORM: [Model; 3] = [Model::Gaussian, Model::Evt, Model::Historical];

/// Multiplying the returns by `c > 0` multiplies every margin by `c`.
///
/// The GARCH margin comes out of an iterative optimizer, so it is only
/// exactly equivariant when `c * x` is itself exact, i.e. for powers of two.
pub fn check_scale_equivariance(values: &[f64], c: f64, coverages: &[f64], models: &[Model]) -> CheckResult {
    let base = report_for_models(values.to_vec(), coverages, models);
    let scaled = report_for_models(values.iter().map(|x| c * x).collect(), coverages, models);
    for (a, b) in base.cells.iter().zip(&scaled.cells) {
        prop_assert_eq!(a.available(), b.available(), "{:?} {:?} {}", a.model, a.side, a.coverage);
        if let (Some(x), Some(y)) = (a.margin, b.margin) {
            prop_assert!(rel_close(c * x, y, 1e-9), "{:?} {:?} {}: {} * {} vs {}", a.model, a.side, a.coverage, c, x, y);
        }
    }
    Ok(())
}

/// For centred returns, every model's margin is non-decreasing in coverage.
pub fn check_monotone_in_coverage(values: &[f64], coverages: &[f64]) -> CheckResult {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let centred: Vec<f64> = values.iter().map(|x| x - m).collect();
    let report = report_for(centred, coverages);
    for model in Model::ALL {
        for side in hfmargin::margins::Side::BOTH {
            let levels: Vec<f64> = report
                .cells
                .iter()
                .filter(|c| c.model == model && c.side == side)
                .filter_map(|c| c.margin)
                .collect();
            for w in levels.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12, "{model} {side}: {levels:?}");
            }
        }
    }
    Ok(())
}

pub fn check_feller_matches_sqrt(ml: f64, horizon: f64) -> CheckResult {
    let f = feller_scale(ml, horizon, 2.0);
    let s = sqrt_scale(ml, horizon);
    prop_assert!(rel_close(f, s, 1e-12), "{f} vs {s}");
    Ok(())
}

pub fn margins_csv(seed: u64) -> Vec<u8> {
    let values: Vec<f64> = fat_tailed(seed, 250, 4.0);
    let report = report_for(values, &[0.95, 0.99, 0.996, 0.998]);
    let mut buf = Vec::new();
    write_margins_csv(&mut buf, &report).unwrap();
    buf
}

pub fn check_byte_identical(seed: u64) -> CheckResult {
    prop_assert_eq!(margins_csv(seed), margins_csv(seed));
    Ok(())
}

/// Sorted grid of tail coverages in [0.9, 0.999).
pub fn coverage_grid() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(900u32..999, 2..6)
        .prop_map(|s| s.into_iter().map(|k| f64::from(k) / 1000.0).collect())
}
