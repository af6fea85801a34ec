//! Turns the configured input into return series.

use std::fs::{self, File};
use std::io::BufReader;

use hfmargin::export::parse_returns;
use hfmargin::marketdata::{
    filter_calendar, parse_ticks, resample_anchored_daily, resample_intraday, roll_contracts, Frequency, ReturnSeries,
    TickSeries, TradingCalendar,
};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Dataset {
    /// One day-over-day series per anchor time (or the single series read
    /// from a returns file).
    pub anchored: Vec<ReturnSeries>,
    pub intraday: Vec<ReturnSeries>,
    /// Rolled, calendar-filtered ticks when the input was tick data.
    pub ticks: Option<TickSeries>,
}

impl Dataset {
    pub fn intraday(&self, frequency: Frequency) -> Option<&ReturnSeries> {
        self.intraday.iter().find(|s| s.frequency == frequency)
    }

    pub fn all_series(&self) -> impl Iterator<Item = &ReturnSeries> {
        self.anchored.iter().chain(&self.intraday)
    }
}

pub fn calendar(cfg: &RunConfig) -> Result<TradingCalendar, CliError> {
    let Some(path) = &cfg.calendar else {
        return Ok(TradingCalendar::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(path.clone(), e))?;
    TradingCalendar::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_ticks(cfg: &RunConfig, cal: &TradingCalendar) -> Result<TickSeries, CliError> {
    let path = cfg
        .ticks
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs tick input (ticks = <file>)".into()))?;
    let file = File::open(path).map_err(|e| CliError::Input(path.clone(), e))?;
    let raw = parse_ticks(BufReader::new(file))?;
    let filtered = filter_calendar(&raw, cal);
    let rolled = roll_contracts(&filtered);
    for w in &rolled.warnings {
        log::warn!("{w}");
    }
    log::info!("{} ticks read, {} kept after calendar filter and roll", raw.len(), rolled.ticks.len());
    Ok(rolled.ticks)
}

pub fn load(cfg: &RunConfig) -> Result<Dataset, CliError> {
    match (&cfg.ticks, &cfg.returns) {
        (Some(_), Some(_)) => Err(CliError::Config("set either ticks or returns, not both".into())),
        (None, None) => Err(CliError::Config("no input: set ticks or returns".into())),
        (None, Some(path)) => {
            let file = File::open(path).map_err(|e| CliError::Input(path.clone(), e))?;
            let series = parse_returns(BufReader::new(file), Frequency::Daily)?;
            Ok(Dataset { anchored: vec![series], intraday: Vec::new(), ticks: None })
        }
        (Some(_), None) => {
            let cal = calendar(cfg)?;
            let ticks = load_ticks(cfg, &cal)?;
            let mut anchored = Vec::with_capacity(cfg.anchors.len());
            for &anchor in &cfg.anchors {
                let r = resample_anchored_daily(&ticks, anchor)?;
                for w in &r.warnings {
                    log::warn!("{w}");
                }
                anchored.push(r.series);
            }
            let mut intraday = Vec::with_capacity(cfg.frequencies.len());
            for &f in &cfg.frequencies {
                let r = resample_intraday(&ticks, &cal, f)?;
                if !r.warnings.is_empty() {
                    log::warn!("{f}: {} incomplete days", r.warnings.len());
                }
                intraday.push(r.series);
            }
            Ok(Dataset { anchored, intraday, ticks: Some(ticks) })
        }
    }
}
