//! Tick CSV: `timestamp,price,volume,delivery_month`, header row optional,
//! lines starting with `#` ignored.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDateTime;

use super::{DeliveryMonth, Tick, TickSeries};
use crate::error::{Error, Result};

const HEADER: [&str; 4] = ["timestamp", "price", "volume", "delivery_month"];

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
        .ok()
}

/// Reads ticks from CSV, one per row, preserving order.
///
/// Errors name the 1-based line of the offending row. Empty input yields an
/// empty series.
pub fn parse_ticks<R: Read>(source: R) -> Result<TickSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(source);

    let mut ticks = Vec::new();
    let mut last: BTreeMap<DeliveryMonth, NaiveDateTime> = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        if row == 0 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case(HEADER[0])) {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        if record.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", record.len())));
        }
        let timestamp = parse_timestamp(&record[0])
            .ok_or_else(|| err(format!("malformed timestamp {:?}", &record[0])))?;
        let price: f64 = record[1]
            .parse()
            .map_err(|_| err(format!("malformed price {:?}", &record[1])))?;
        if !(price.is_finite() && price > 0.0) {
            return Err(err(format!("price must be positive, got {price}")));
        }
        let volume: u64 = record[2]
            .parse()
            .map_err(|_| err(format!("malformed volume {:?}", &record[2])))?;
        let delivery_month: DeliveryMonth = record[3].parse().map_err(|e| err(format!("{e}")))?;
        if let Some(prev) = last.insert(delivery_month, timestamp) {
            if timestamp < prev {
                return Err(err(format!("timestamp goes backwards within {delivery_month}")));
            }
        }
        ticks.push(Tick { timestamp, price, volume, delivery_month });
    }
    log::debug!("parsed {} ticks", ticks.len());
    Ok(TickSeries::from_vec_unchecked(ticks))
}

/// Writes ticks in the same CSV layout `parse_ticks` reads, with a header row.
pub fn write_ticks<W: Write>(ticks: &TickSeries, mut out: W) -> Result<()> {
    writeln!(out, "{}", HEADER.join(","))?;
    for t in ticks.ticks() {
        writeln!(
            out,
            "{},{},{},{}",
            t.timestamp.format("%Y-%m-%dT%H:%M:%S%.f"),
            t.price,
            t.volume,
            t.delivery_month
        )?;
    }
    Ok(())
}
