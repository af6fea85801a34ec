mod common;

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use proptest::prelude::*;

use common::*;
use hfmargin::descstats::{empirical_quantile, ljung_box, moment_summary};
use hfmargin::margins::{gaussian_margin, historical_margin, sqrt_scale, Model, Side};
use hfmargin::marketdata::{
    filter_calendar, resample_anchored_daily, roll_contracts, DeliveryMonth, Frequency, Tick, TickSeries,
    TradingCalendar,
};
use hfmargin::tails::{estimate_tail, feller_scale, hill_inverse_alpha, side_sorted, TailOptions, TailSide};

fn light() -> ProptestConfig {
    ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(light())]

    #[test]
    fn intraday_returns_telescope(seed in any::<u64>(), days in 1usize..4, hourly in any::<bool>()) {
        let f = if hourly { Frequency::Hourly } else { Frequency::FiveMinute };
        check_telescoping(seed, days, f)?;
    }

    #[test]
    fn anchored_series_share_length(seed in any::<u64>(), days in 2usize..8) {
        let ticks = walk(seed, days, 0.1);
        let lens: Vec<usize> = (9..=17)
            .map(|h| resample_anchored_daily(&ticks, NaiveTime::from_hms_opt(h, 0, 0).unwrap()).unwrap().series.len())
            .collect();
        prop_assert!(lens.iter().all(|&l| l == days - 1), "{lens:?}");
    }

    #[test]
    fn calendar_filter_is_idempotent(seed in any::<u64>(), open_h in 7u32..10, close_h in 15u32..18, holiday in 0i64..6) {
        let ticks = walk(seed, 4, 0.1);
        let mut cal = TradingCalendar {
            session_open: NaiveTime::from_hms_opt(open_h, 30, 0).unwrap(),
            session_close: NaiveTime::from_hms_opt(close_h, 0, 0).unwrap(),
            ..TradingCalendar::default()
        };
        cal.full_holidays.insert(NaiveDate::from_ymd_opt(2000, 1, 3).unwrap() + chrono::Duration::days(holiday));
        let once = filter_calendar(&ticks, &cal);
        prop_assert_eq!(filter_calendar(&once, &cal), once.clone());
        prop_assert!(once.ticks().iter().all(|t| cal.in_session(t.time()) && !cal.is_excluded(t.date())));
    }

    #[test]
    fn moments_location_scale(seed in any::<u64>(), a in -10.0f64..10.0, b in 0.1f64..10.0) {
        let x = fat_tailed(seed, 200, 5.0);
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let (sx, sy) = (moment_summary(&x).unwrap(), moment_summary(&y).unwrap());
        prop_assert!((sy.mean - (a + b * sx.mean)).abs() < 1e-9);
        prop_assert!(rel_close(sy.std_dev, b * sx.std_dev, 1e-9));
        prop_assert!((sy.skewness - sx.skewness).abs() < 1e-8);
        prop_assert!((sy.excess_kurtosis - sx.excess_kurtosis).abs() < 1e-8);
        prop_assert!(rel_close(sy.median - a, b * sx.median, 1e-9));
    }

    #[test]
    fn quantiles_monotone(x in prop::collection::vec(-100.0f64..100.0, 1..200), q1 in 0.0f64..1.0, q2 in 0.0f64..1.0) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(empirical_quantile(&x, lo).unwrap() <= empirical_quantile(&x, hi).unwrap());
    }

    #[test]
    fn ljung_box_ignores_sign(seed in any::<u64>(), lags in 1usize..25) {
        let x = fat_tailed(seed, 120, 4.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (a, b) = (ljung_box(&x, lags).unwrap(), ljung_box(&neg, lags).unwrap());
        prop_assert!(rel_close(a.statistic, b.statistic, 1e-12));
    }

    #[test]
    fn left_tail_is_mirrored_right_tail(seed in any::<u64>()) {
        let x = fat_tailed(seed, 300, 3.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let opts = TailOptions::default();
        match (estimate_tail(&x, TailSide::Left, &opts), estimate_tail(&neg, TailSide::Right, &opts)) {
            (Ok(l), Ok(r)) => {
                prop_assert_eq!(l.alpha, r.alpha);
                prop_assert_eq!(l.threshold, r.threshold);
            }
            (l, r) => prop_assert_eq!(l.is_err(), r.is_err()),
        }
    }

    #[test]
    fn hill_ignores_units(seed in any::<u64>(), c in 0.001f64..1000.0, k in 1usize..100) {
        let x = side_sorted(&fat_tailed(seed, 400, 3.0), TailSide::Right);
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let (a, b) = (hill_inverse_alpha(&x, k).unwrap(), hill_inverse_alpha(&y, k).unwrap());
        prop_assert!(rel_close(a, b, 1e-9), "{a} {b}");
    }

    #[test]
    fn feller_composes(ml in 0.01f64..10.0, t1 in 1.0f64..300.0, t2 in 1.0f64..300.0, alpha in 1.0f64..8.0) {
        let two_step = feller_scale(feller_scale(ml, t1, alpha), t2, alpha);
        prop_assert!(rel_close(two_step, feller_scale(ml, t1 * t2, alpha), 1e-12));
    }

    #[test]
    fn feller_at_two_is_square_root(ml in 0.0f64..100.0, t in 1.0f64..1000.0) {
        check_feller_matches_sqrt(ml, t)?;
    }

    #[test]
    fn historical_matches_sort_and_scan(
        x in prop::collection::vec(-50.0f64..50.0, 10..400),
        p in prop::sample::select(vec![0.9, 0.95, 0.99]),
        long in any::<bool>(),
    ) {
        let side = if long { Side::Long } else { Side::Short };
        let n = x.len();
        let got = historical_margin(&x, p, side);
        if (n as f64) * (1.0 - p) < 1.0 - 1e-9 {
            prop_assert!(got.is_err());
        } else {
            let mut losses: Vec<f64> = x.iter().map(|v| if long { -v } else { *v }).collect();
            losses.sort_by(f64::total_cmp);
            let k = (1..=n).find(|&k| k as f64 / n as f64 >= p).unwrap();
            prop_assert_eq!(got.unwrap(), losses[k - 1].abs());
        }
    }

    #[test]
    fn margins_scale_with_units(seed in any::<u64>(), c in 0.01f64..100.0, coverages in coverage_grid()) {
        check_scale_equivariance(&fat_tailed(seed, 250, 4.0), c, &coverages, &CLOSED_FORM)?;
    }

    #[test]
    fn all_margins_scale_with_binary_units(seed in any::<u64>(), k in -20i32..20, coverages in coverage_grid()) {
        check_scale_equivariance(&fat_tailed(seed, 250, 4.0), 2f64.powi(k), &coverages, &Model::ALL)?;
    }

    #[test]
    fn margins_increase_with_coverage(seed in any::<u64>(), coverages in coverage_grid()) {
        check_monotone_in_coverage(&fat_tailed(seed, 250, 4.0), &coverages)?;
    }

    #[test]
    fn gaussian_sides_agree_without_drift(sigma in 0.01f64..10.0, p in 0.5001f64..0.9999, t in 1.0f64..300.0) {
        let long = gaussian_margin(0.0, sigma, p, t, Side::Long).unwrap();
        prop_assert_eq!(long, gaussian_margin(0.0, sigma, p, t, Side::Short).unwrap());
    }

    #[test]
    fn scaled_margins_increase_with_horizon(ml in 0.0f64..10.0, t1 in 1.0f64..500.0, t2 in 1.0f64..500.0, alpha in 1.0f64..8.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(sqrt_scale(ml, lo) <= sqrt_scale(ml, hi));
        prop_assert!(feller_scale(ml, lo, alpha) <= feller_scale(ml, hi, alpha));
    }

    #[test]
    fn reports_are_reproducible(seed in any::<u64>()) {
        check_byte_identical(seed)?;
    }
}

/// Day-by-day volume crossover, written without reference to the library's loop.
fn roll_oracle(ticks: &[Tick]) -> Vec<Tick> {
    let mut days: BTreeMap<NaiveDate, Vec<&Tick>> = BTreeMap::new();
    for t in ticks {
        days.entry(t.date()).or_default().push(t);
    }
    let mut months: Vec<DeliveryMonth> = ticks.iter().map(|t| t.delivery_month).collect();
    months.sort();
    months.dedup();
    let first = days.values().next().unwrap();
    let mut active = first.iter().map(|t| t.delivery_month).min().unwrap();
    let mut out = Vec::new();
    for day in days.values() {
        for t in day {
            if t.delivery_month == active {
                out.push((*t).clone());
            }
        }
        let vol = |m: DeliveryMonth| day.iter().filter(|t| t.delivery_month == m).map(|t| t.volume).sum::<u64>();
        if let Some(pos) = months.iter().position(|&m| m == active) {
            if let Some(&next) = months.get(pos + 1) {
                if vol(next) > vol(active) {
                    active = next;
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn roll_matches_oracle(
        days in prop::collection::vec(prop::collection::vec((0usize..3, 1u64..100), 1..8), 1..10),
    ) {
        let months = ["2000-03", "2000-06", "2000-09"].map(|m| m.parse::<DeliveryMonth>().unwrap());
        let mut ticks = Vec::new();
        for (d, trades) in days.iter().enumerate() {
            let date = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap() + chrono::Duration::days(d as i64);
            for (i, &(m, volume)) in trades.iter().enumerate() {
                ticks.push(Tick {
                    timestamp: NaiveDateTime::new(date, NaiveTime::from_hms_opt(9, i as u32, 0).unwrap()),
                    price: 6000.0 + i as f64,
                    volume,
                    delivery_month: months[m],
                });
            }
        }
        let series = TickSeries::new(ticks.clone()).unwrap();
        let rolled = roll_contracts(&series);
        prop_assert_eq!(rolled.ticks.ticks().to_vec(), roll_oracle(&ticks));
    }
}
