//! CSV and JSON writers for the analysis outputs.
//!
//! Numbers are written with a fixed number of decimals and `.` as the
//! decimal separator; unavailable values are written as `na`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::descstats::{MomentSummary, TestResult};
use crate::error::{Error, Result};
use crate::garch::GarchFit;
use crate::margins::{ComparisonReport, MarginReport};
use crate::marketdata::{Frequency, ReturnSeries};
use crate::tails::{moment_existence_test, TailEstimate};

pub const DECIMALS: usize = 6;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.DECIMALS$}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "na".to_string(), fmt_num)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

pub fn write_returns_csv<W: Write>(w: W, series: &ReturnSeries) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["day_index", "boundary_time", "return_pct"])?;
    for i in 0..series.len() {
        let boundary = series.boundary[i].map_or_else(String::new, |t| t.format("%H:%M").to_string());
        out.write_record([series.day_index[i].to_string(), boundary, fmt_num(series.values[i])])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the `return_pct` column of a returns CSV as written by
/// [`write_returns_csv`]. Lines starting with `#` are ignored.
pub fn parse_returns<R: Read>(source: R, frequency: Frequency) -> Result<ReturnSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let column = reader
        .headers()?
        .iter()
        .position(|h| h == "return_pct")
        .ok_or_else(|| Error::Parse { line: 1, message: "missing return_pct column".into() })?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = record.get(column).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("malformed return {field:?}") })?;
        if !v.is_finite() {
            return Err(Error::Parse { line, message: "non-finite return".into() });
        }
        values.push(v);
    }
    Ok(ReturnSeries::from_values(frequency, values))
}

/// One row of the descriptive statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub frequency: String,
    pub anchor: String,
    /// `returns` or `squared`.
    pub transform: String,
    pub summary: MomentSummary,
    pub ks: Option<TestResult>,
    pub ljung_box: Option<TestResult>,
}

pub fn write_stats_csv<W: Write>(w: W, rows: &[StatsRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "frequency", "anchor", "transform", "n", "mean", "std_dev", "skewness", "excess_kurtosis", "min", "q25", "median",
        "q75", "max", "ks_stat", "ks_p", "lb_stat", "lb_p",
    ])?;
    for r in rows {
        let s = &r.summary;
        out.write_record([
            r.frequency.clone(),
            r.anchor.clone(),
            r.transform.clone(),
            s.n.to_string(),
            fmt_num(s.mean),
            fmt_num(s.std_dev),
            fmt_num(s.skewness),
            fmt_num(s.excess_kurtosis),
            fmt_num(s.min),
            fmt_num(s.q25),
            fmt_num(s.median),
            fmt_num(s.q75),
            fmt_num(s.max),
            fmt_opt(r.ks.as_ref().map(|t| t.statistic)),
            fmt_opt(r.ks.as_ref().map(|t| t.p_value)),
            fmt_opt(r.ljung_box.as_ref().map(|t| t.statistic)),
            fmt_opt(r.ljung_box.as_ref().map(|t| t.p_value)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Tail index with the second and fourth moment tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub series: String,
    pub estimate: TailEstimate,
    pub second_moment: TestResult,
    pub fourth_moment: TestResult,
}

impl TailRow {
    pub fn new(series: impl Into<String>, estimate: TailEstimate) -> Result<Self> {
        let second_moment = moment_existence_test(&estimate, 2)?;
        let fourth_moment = moment_existence_test(&estimate, 4)?;
        Ok(Self { series: series.into(), estimate, second_moment, fourth_moment })
    }
}

pub fn write_tails_csv<W: Write>(w: W, rows: &[TailRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "series", "side", "alpha", "se_alpha", "eta", "threshold", "n_tail", "z_alpha2", "p_alpha2",
        "table_p_alpha2", "z_alpha4", "p_alpha4", "table_p_alpha4",
    ])?;
    for r in rows {
        let e = &r.estimate;
        out.write_record([
            r.series.clone(),
            e.side.as_str().to_string(),
            fmt_num(e.alpha),
            fmt_num(e.se_alpha),
            e.eta.to_string(),
            fmt_num(e.threshold),
            e.n_tail.to_string(),
            fmt_num(r.second_moment.statistic),
            fmt_num(r.second_moment.p_value),
            fmt_opt(r.second_moment.param("table_p")),
            fmt_num(r.fourth_moment.statistic),
            fmt_num(r.fourth_moment.p_value),
            fmt_opt(r.fourth_moment.param("table_p")),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_garch_csv<W: Write>(w: W, rows: &[(String, GarchFit)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "series", "alpha0", "alpha1", "beta1", "mu", "log_likelihood", "converged", "iterations", "next_sigma2",
    ])?;
    for (series, fit) in rows {
        let p = &fit.params;
        out.write_record([
            series.clone(),
            fmt_num(p.alpha0),
            fmt_num(p.alpha1),
            fmt_num(p.beta1),
            fmt_num(p.mu),
            fmt_num(fit.log_likelihood),
            fit.converged.to_string(),
            fit.iterations.to_string(),
            fmt_num(fit.next_sigma2()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_margins_csv<W: Write>(w: W, report: &MarginReport) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["series", "model", "coverage", "waiting_days", "side", "margin", "available", "scaling_preset"])?;
    let preset = report.scaling_preset.map_or("na", |p| p.as_str());
    for c in &report.cells {
        out.write_record([
            c.series.clone(),
            c.model.to_string(),
            c.coverage.to_string(),
            c.waiting_days.to_string(),
            c.side.to_string(),
            fmt_opt(c.margin),
            c.available().to_string(),
            preset.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(w: W, report: &ComparisonReport) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "model", "coverage", "waiting_days", "side", "scaled_5min", "scaled_1h", "daily_mean", "t_5min", "p_5min",
        "t_1h", "p_1h", "scaling_preset",
    ])?;
    let preset = report.scaling_preset.map_or("na", |p| p.as_str());
    for r in &report.rows {
        out.write_record([
            r.model.to_string(),
            r.coverage.to_string(),
            r.waiting_days.to_string(),
            r.side.to_string(),
            fmt_opt(r.scaled_5min),
            fmt_opt(r.scaled_1h),
            fmt_opt(r.daily_mean),
            fmt_opt(r.t_5min.as_ref().map(|t| t.statistic)),
            fmt_opt(r.t_5min.as_ref().map(|t| t.p_value)),
            fmt_opt(r.t_1h.as_ref().map(|t| t.statistic)),
            fmt_opt(r.t_1h.as_ref().map(|t| t.p_value)),
            preset.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
