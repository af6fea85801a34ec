use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::{DeliveryMonth, TickSeries, Warning};

/// A stitched single-contract series plus any days that had to be skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Rolled {
    pub ticks: TickSeries,
    pub warnings: Vec<Warning>,
}

/// Stitches several delivery months into one series by volume crossover.
///
/// The nearest month trading on the first day starts active. At the end of
/// each day the next delivery month takes over from the following day if
/// its summed daily volume exceeded the active month's.
pub fn roll_contracts(ticks: &TickSeries) -> Rolled {
    let months = ticks.delivery_months();
    let by_day = ticks.by_day();
    let Some((_, first_day)) = by_day.iter().next() else {
        return Rolled { ticks: TickSeries::default(), warnings: Vec::new() };
    };

    let mut active = first_day.iter().map(|t| t.delivery_month).min().expect("non-empty day");
    let mut out = Vec::with_capacity(ticks.len());
    let mut warnings = Vec::new();

    for (&date, day) in &by_day {
        let mut volume: BTreeMap<DeliveryMonth, u64> = BTreeMap::new();
        for t in day {
            *volume.entry(t.delivery_month).or_default() += t.volume;
        }
        let before = out.len();
        out.extend(day.iter().filter(|t| t.delivery_month == active).map(|t| (*t).clone()));
        if out.len() == before {
            log::warn!("{date}: no trades in active month {active}");
            warnings.push(Warning::RollGap { date, month: active });
        }
        if let Some(&next) = months.iter().find(|&&m| m > active) {
            let v_active = volume.get(&active).copied().unwrap_or(0);
            let v_next = volume.get(&next).copied().unwrap_or(0);
            if v_next > v_active {
                log::debug!("{date}: rolling {active} -> {next} ({v_next} > {v_active})");
                active = next;
            }
        }
    }
    Rolled { ticks: TickSeries::from_vec_unchecked(out), warnings }
}

/// Active delivery month per output day.
pub fn active_months(ticks: &TickSeries) -> BTreeMap<NaiveDate, DeliveryMonth> {
    ticks.ticks().iter().map(|t| (t.date(), t.delivery_month)).collect()
}
