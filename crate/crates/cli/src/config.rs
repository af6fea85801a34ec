//! Run configuration: a flat `key = value` file, overridable per flag.
//!
//! Keys: `ticks`, `returns`, `calendar`, `spec`, `anchors`, `frequencies`,
//! `coverages`, `models`, `scaling_preset`, `seed`, `out_dir`, `ks_reps`,
//! `lb_lags`, `eta`, `threshold_fraction`, `call_threshold`, `long_margin`,
//! `short_margin`. Lists are comma separated; `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveTime;
use sha2::{Digest, Sha256};

use hfmargin::descstats::{DEFAULT_KS_REPS, DEFAULT_LB_LAGS};
use hfmargin::margins::{Model, ScalingPreset, DEFAULT_CALL_THRESHOLD};
use hfmargin::marketdata::Frequency;
use hfmargin::tails::DEFAULT_THRESHOLD_FRACTION;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ticks: Option<PathBuf>,
    pub returns: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub anchors: Vec<NaiveTime>,
    pub frequencies: Vec<Frequency>,
    pub coverages: Vec<f64>,
    pub models: Vec<Model>,
    pub scaling_preset: ScalingPreset,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ks_reps: usize,
    pub lb_lags: usize,
    pub eta: Option<usize>,
    pub threshold_fraction: f64,
    pub call_threshold: f64,
    pub long_margin: Option<f64>,
    pub short_margin: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ticks: None,
            returns: None,
            calendar: None,
            spec: None,
            anchors: (9..=17).map(|h| NaiveTime::from_hms_opt(h, 0, 0).unwrap()).collect(),
            frequencies: vec![Frequency::FiveMinute, Frequency::Hourly],
            coverages: vec![0.95, 0.99, 0.996, 0.998],
            models: Model::ALL.to_vec(),
            scaling_preset: ScalingPreset::Calendar,
            seed: 1,
            out_dir: PathBuf::from("out"),
            ks_reps: DEFAULT_KS_REPS,
            lb_lags: DEFAULT_LB_LAGS,
            eta: None,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            call_threshold: DEFAULT_CALL_THRESHOLD,
            long_margin: None,
            short_margin: None,
        }
    }
}

fn list<T>(value: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

fn number<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("not a number: {value:?}"))
}

fn time(value: &str) -> Result<NaiveTime, String> {
    NaiveTime::parse_from_str(value, "%H:%M").map_err(|_| format!("not a HH:MM time: {value:?}"))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let path = || Some(PathBuf::from(value));
        match key {
            "ticks" => self.ticks = path(),
            "returns" => self.returns = path(),
            "calendar" => self.calendar = path(),
            "spec" => self.spec = path(),
            "anchors" => self.anchors = list(value, time)?,
            "frequencies" => {
                self.frequencies = list(value, |s| s.parse::<Frequency>().map_err(|e| e.to_string()))?
            }
            "coverages" => self.coverages = list(value, number)?,
            "models" => self.models = list(value, |s| s.parse::<Model>().map_err(|e| e.to_string()))?,
            "scaling_preset" => self.scaling_preset = value.parse().map_err(|e: hfmargin::Error| e.to_string())?,
            "seed" => self.seed = number(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "ks_reps" => self.ks_reps = number(value)?,
            "lb_lags" => self.lb_lags = number(value)?,
            "eta" => self.eta = Some(number(value)?),
            "threshold_fraction" => self.threshold_fraction = number(value)?,
            "call_threshold" => self.call_threshold = number(value)?,
            "long_margin" => self.long_margin = Some(number(value)?),
            "short_margin" => self.short_margin = Some(number(value)?),
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.coverages.is_empty() {
            return bad("coverages must not be empty".into());
        }
        if self.coverages.iter().any(|&p| !(p > 0.5 && p < 1.0)) {
            return bad(format!("coverages must lie in (0.5, 1): {:?}", self.coverages));
        }
        if self.coverages.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("coverages must be strictly increasing: {:?}", self.coverages));
        }
        if self.anchors.is_empty() || self.anchors.windows(2).any(|w| w[1] <= w[0]) {
            return bad("anchors must be a non-empty increasing list".into());
        }
        if self.frequencies.contains(&Frequency::Daily) {
            return bad("frequencies lists intraday intervals only (5min, 1h)".into());
        }
        if self.models.is_empty() {
            return bad("models must not be empty".into());
        }
        if self.ks_reps == 0 || self.lb_lags == 0 {
            return bad("ks_reps and lb_lags must be positive".into());
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return bad(format!("threshold_fraction {} outside (0, 1)", self.threshold_fraction));
        }
        if !(self.call_threshold > 0.0 && self.call_threshold <= 1.0) {
            return bad(format!("call_threshold {} outside (0, 1]", self.call_threshold));
        }
        for m in [self.long_margin, self.short_margin].into_iter().flatten() {
            if !(m > 0.0) {
                return bad(format!("margins must be positive, got {m}"));
            }
        }
        Ok(())
    }

    /// SHA-256 over the settings that determine the results. Input files
    /// enter by content, so the hash does not depend on where they live;
    /// the output directory is left out.
    pub fn hash(&self) -> Result<String, CliError> {
        let mut text = String::new();
        for (key, path) in [("ticks", &self.ticks), ("returns", &self.returns), ("calendar", &self.calendar), ("spec", &self.spec)] {
            if let Some(p) = path {
                let bytes = fs::read(p).map_err(|e| CliError::Input(p.clone(), e))?;
                let _ = writeln!(text, "{key}={}", hex::encode(Sha256::digest(&bytes)));
            }
        }
        let join = |v: Vec<String>| v.join(",");
        let _ = writeln!(text, "anchors={}", join(self.anchors.iter().map(|t| t.format("%H:%M").to_string()).collect()));
        let _ = writeln!(text, "frequencies={}", join(self.frequencies.iter().map(|f| f.to_string()).collect()));
        let _ = writeln!(text, "coverages={}", join(self.coverages.iter().map(|p| p.to_string()).collect()));
        let _ = writeln!(text, "models={}", join(self.models.iter().map(|m| m.to_string()).collect()));
        let _ = writeln!(text, "scaling_preset={}", self.scaling_preset);
        let _ = writeln!(text, "seed={}", self.seed);
        let _ = writeln!(text, "ks_reps={}", self.ks_reps);
        let _ = writeln!(text, "lb_lags={}", self.lb_lags);
        let _ = writeln!(text, "eta={}", self.eta.map_or("auto".to_string(), |e| e.to_string()));
        let _ = writeln!(text, "threshold_fraction={}", self.threshold_fraction);
        let _ = writeln!(text, "call_threshold={}", self.call_threshold);
        let opt = |m: Option<f64>| m.map_or("none".to_string(), |v| v.to_string());
        let _ = writeln!(text, "long_margin={}", opt(self.long_margin));
        let _ = writeln!(text, "short_margin={}", opt(self.short_margin));
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}
