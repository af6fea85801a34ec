//! One function per subcommand. Each returns the files it wants written;
//! nothing touches the output directory until every output is ready.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, Write};

use serde::Serialize;

use hfmargin::descstats::{ks_normality_with_null, ljung_box, moment_summary, LillieforsNull, TestResult};
use hfmargin::export::{
    fmt_num, write_comparison_csv, write_garch_csv, write_json, write_margins_csv, write_returns_csv,
    write_stats_csv, write_tails_csv, StatsRow, TailRow,
};
use hfmargin::garch::{fit_garch11, FitOptions};
use hfmargin::margins::{
    compare_scaled_vs_daily, intraday_call_monitor, margin_table, MarginSpec, ScalingHorizons, TableOptions,
};
use hfmargin::marketdata::{Frequency, ReturnSeries};
use hfmargin::synth::{generate_with_calendar, Generated, GeneratorSpec, RNG_NAME};
use hfmargin::tails::{estimate_tail, TailOptions, TailSide};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipeline::{self, Dataset};

pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Output files for one run, each starting with the provenance header.
pub struct Outputs {
    header: String,
    hash: String,
    preset: String,
    files: Vec<Output>,
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize + ?Sized> {
    config_sha256: &'a str,
    scaling_preset: &'a str,
    rng: &'a str,
    data: &'a T,
}

impl Outputs {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let hash = cfg.hash()?;
        let preset = cfg.scaling_preset.to_string();
        let header = format!("# hfmargin config_sha256={hash} scaling_preset={preset} rng={RNG_NAME}\n");
        Ok(Self { header, hash, preset, files: Vec::new() })
    }

    fn csv(
        &mut self,
        name: impl Into<String>,
        write: impl FnOnce(&mut Vec<u8>) -> hfmargin::Result<()>,
    ) -> Result<(), CliError> {
        let mut bytes = self.header.clone().into_bytes();
        write(&mut bytes)?;
        self.files.push(Output { name: name.into(), bytes });
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: impl Into<String>, data: &T) -> Result<(), CliError> {
        let envelope = JsonEnvelope { config_sha256: &self.hash, scaling_preset: &self.preset, rng: RNG_NAME, data };
        let mut bytes = Vec::new();
        write_json(&mut bytes, &envelope)?;
        self.files.push(Output { name: name.into(), bytes });
        Ok(())
    }

    pub fn write_all(self, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
        let dir = &cfg.out_dir;
        fs::create_dir_all(dir).map_err(|e| CliError::Output(dir.clone(), e))?;
        let mut names = Vec::with_capacity(self.files.len());
        for f in self.files {
            let path = dir.join(&f.name);
            let tmp = dir.join(format!(".{}.tmp", f.name));
            File::create(&tmp)
                .and_then(|mut out| out.write_all(&f.bytes))
                .and_then(|_| fs::rename(&tmp, &path))
                .map_err(|e| CliError::Output(path.clone(), e))?;
            names.push(f.name);
        }
        Ok(names)
    }
}

fn file_label(series: &ReturnSeries) -> String {
    series.label().replace(':', "")
}

fn table_options(cfg: &RunConfig) -> TableOptions {
    TableOptions {
        tail: TailOptions { eta: cfg.eta, threshold_fraction: Some(cfg.threshold_fraction) },
        garch: FitOptions::default(),
        scaling_preset: Some(cfg.scaling_preset),
    }
}

fn daily_specs(cfg: &RunConfig) -> Result<Vec<MarginSpec>, CliError> {
    Ok(MarginSpec::grid(&cfg.coverages, &cfg.models)?)
}

pub fn ingest(_cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    for s in data.all_series() {
        out.csv(format!("returns_{}.csv", file_label(s)), |w| write_returns_csv(w, s))?;
    }
    Ok(())
}

pub fn stats(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    // the Lilliefors null depends on the sample size only; share it
    let mut nulls: BTreeMap<usize, LillieforsNull> = BTreeMap::new();
    let mut rows = Vec::new();
    for s in data.all_series() {
        let squared: Vec<f64> = s.values.iter().map(|v| v * v).collect();
        for (transform, values) in [("returns", &s.values), ("squared", &squared)] {
            let summary = moment_summary(values)?;
            let null = match nulls.entry(values.len()) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(LillieforsNull::simulate(values.len(), cfg.ks_reps, cfg.seed)?)
                }
            };
            let ks = ks_normality_with_null(values, null).ok();
            let lb: Option<TestResult> = ljung_box(values, cfg.lb_lags).ok();
            rows.push(StatsRow {
                frequency: s.frequency.to_string(),
                anchor: s.anchor.map_or_else(String::new, |a| a.format("%H:%M").to_string()),
                transform: transform.to_string(),
                summary,
                ks,
                ljung_box: lb,
            });
        }
    }
    out.csv("stats.csv", |w| write_stats_csv(w, &rows))?;
    out.json("stats.json", &rows)
}

pub fn tails(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let opts = TailOptions { eta: cfg.eta, threshold_fraction: Some(cfg.threshold_fraction) };
    let mut rows = Vec::new();
    for side in [TailSide::Left, TailSide::Right] {
        for s in data.all_series() {
            match estimate_tail(&s.values, side, &opts).and_then(|e| TailRow::new(s.label(), e)) {
                Ok(row) => rows.push(row),
                Err(e) => log::warn!("{} {} tail: {e}", s.label(), side.as_str()),
            }
        }
    }
    out.csv("tails.csv", |w| write_tails_csv(w, &rows))?;
    out.json("tails.json", &rows)
}

pub fn garch(_cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for s in data.all_series() {
        match fit_garch11(&s.values, &FitOptions::default()) {
            Ok(fit) => {
                if !fit.converged {
                    log::warn!("{}: GARCH fit stopped at the iteration budget", s.label());
                }
                rows.push((s.label(), fit));
            }
            Err(e) => log::warn!("{}: {e}", s.label()),
        }
    }
    out.csv("garch.csv", |w| write_garch_csv(w, &rows))?;
    let summary: Vec<_> = rows.iter().map(|(label, fit)| (label, &fit.params, fit.converged)).collect();
    out.json("garch.json", &summary)
}

fn comparison(cfg: &RunConfig, data: &Dataset) -> Result<hfmargin::margins::ComparisonReport, CliError> {
    Ok(compare_scaled_vs_daily(
        data.intraday(Frequency::FiveMinute),
        data.intraday(Frequency::Hourly),
        &data.anchored,
        &cfg.coverages,
        &cfg.models,
        ScalingHorizons::from_preset(cfg.scaling_preset),
        &table_options(cfg),
    )?)
}

pub fn margins(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let report = margin_table(&data.anchored, &daily_specs(cfg)?, &table_options(cfg));
    out.csv("margins_daily.csv", |w| write_margins_csv(w, &report))?;
    out.json("margins_daily.json", &report)?;
    if !data.intraday.is_empty() {
        let cmp = comparison(cfg, data)?;
        out.csv("margins_scaled.csv", |w| write_comparison_csv(w, &cmp))?;
        out.json("margins_scaled.json", &cmp.rows)?;
    }
    Ok(())
}

pub fn compare(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    if data.intraday.is_empty() {
        return Err(CliError::Config("compare needs tick input with intraday frequencies".into()));
    }
    let cmp = comparison(cfg, data)?;
    out.csv("compare.csv", |w| write_comparison_csv(w, &cmp))?;
    out.json("compare.json", &cmp)
}

pub fn monitor(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let (Some(long), Some(short)) = (cfg.long_margin, cfg.short_margin) else {
        return Err(CliError::Config("monitor needs long_margin and short_margin".into()));
    };
    let ticks = data
        .ticks
        .as_ref()
        .ok_or_else(|| CliError::Config("monitor needs tick input".into()))?;
    let mut calls = Vec::new();
    for day in ticks.by_day().values() {
        let path: Vec<_> = day.iter().map(|t| (t.timestamp, t.price)).collect();
        calls.extend(intraday_call_monitor(&path, long, short, cfg.call_threshold)?);
    }
    out.csv("calls.csv", |w| {
        writeln!(w, "date,side,timestamp,move_pct,trigger_pct")?;
        for c in &calls {
            writeln!(
                w,
                "{},{},{},{},{}",
                c.timestamp.format("%Y-%m-%d"),
                c.side,
                c.timestamp.format("%Y-%m-%dT%H:%M:%S"),
                fmt_num(c.move_pct),
                fmt_num(c.trigger_pct)
            )?;
        }
        Ok(())
    })?;
    out.json("calls.json", &calls)
}

pub fn synth(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let path = cfg
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Config("synth needs a generator spec (spec = <file.json>)".into()))?;
    let file = File::open(path).map_err(|e| CliError::Input(path.clone(), e))?;
    let spec: GeneratorSpec = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let cal = pipeline::calendar(cfg)?;
    match generate_with_calendar(&spec, &cal)? {
        Generated::Ticks(ticks) => out.csv("synth_ticks.csv", |w| hfmargin::marketdata::write_ticks(&ticks, w)),
        Generated::Returns(series) => out.csv("synth_returns.csv", |w| write_returns_csv(w, &series)),
    }
}
