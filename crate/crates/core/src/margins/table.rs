use serde::{Deserialize, Serialize};

use super::{gaussian_margin, historical_margin, waiting_days, MarginSpec, Model, ScalingPreset, Side};
use crate::descstats::{mean, std_dev};
use crate::error::{Error, Result};
use crate::garch::{fit_garch11, garch_margin, FitOptions, GarchFit};
use crate::marketdata::ReturnSeries;
use crate::tails::{estimate_tail, evt_margin, feller_scale, TailEstimate, TailOptions};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TableOptions {
    pub tail: TailOptions,
    pub garch: FitOptions,
    /// Recorded in the report; the horizons themselves come from the specs.
    pub scaling_preset: Option<ScalingPreset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCell {
    pub series: String,
    pub model: Model,
    pub coverage: f64,
    pub horizon: f64,
    pub waiting_days: u64,
    pub side: Side,
    /// `None` when the model cannot produce this cell.
    pub margin: Option<f64>,
    pub note: Option<String>,
}

impl MarginCell {
    pub fn available(&self) -> bool {
        self.margin.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub scaling_preset: Option<ScalingPreset>,
    pub cells: Vec<MarginCell>,
}

impl MarginReport {
    pub fn get(&self, series: &str, model: Model, coverage: f64, side: Side) -> Option<&MarginCell> {
        self.cells
            .iter()
            .find(|c| c.series == series && c.model == model && c.side == side && c.coverage == coverage)
    }
}

/// Per-series model inputs, fitted once and shared by every cell.
struct Inputs<'a> {
    values: &'a [f64],
    tails: [Option<std::result::Result<TailEstimate, String>>; 2],
    garch: Option<std::result::Result<GarchFit, String>>,
}

impl<'a> Inputs<'a> {
    fn new(values: &'a [f64]) -> Self {
        Self { values, tails: [None, None], garch: None }
    }

    fn tail(&mut self, side: Side, opts: &TailOptions) -> Result<&TailEstimate> {
        let values = self.values;
        self.tails[side as usize]
            .get_or_insert_with(|| estimate_tail(values, side.tail(), opts).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Unavailable(e.clone()))
    }

    fn garch(&mut self, opts: &FitOptions) -> Result<&GarchFit> {
        let values = self.values;
        self.garch
            .get_or_insert_with(|| fit_garch11(values, opts).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Unavailable(e.clone()))
    }

    fn margin(&mut self, spec: &MarginSpec, opts: &TableOptions) -> Result<f64> {
        spec.validate()?;
        match spec.model {
            Model::Gaussian => {
                if self.values.len() < 2 {
                    return Err(Error::InsufficientData { needed: 2, got: self.values.len() });
                }
                gaussian_margin(mean(self.values), std_dev(self.values), spec.coverage, spec.horizon, spec.side)
            }
            Model::Evt => {
                let est = self.tail(spec.side, &opts.tail)?;
                let ml = evt_margin(est, 1.0 - spec.coverage)?;
                Ok(feller_scale(ml, spec.horizon, est.alpha))
            }
            Model::Historical => {
                if spec.horizon != 1.0 {
                    return Err(Error::Unavailable("historical margins have no scaling rule".into()));
                }
                historical_margin(self.values, spec.coverage, spec.side)
            }
            Model::Garch => {
                let fit = self.garch(&opts.garch)?;
                garch_margin(fit, spec.coverage, spec.horizon, spec.side)
            }
        }
    }
}

/// Evaluates every spec on every series. A cell that cannot be computed is
/// reported as unavailable with the reason; it never aborts the grid.
pub fn margin_table(series: &[ReturnSeries], specs: &[MarginSpec], opts: &TableOptions) -> MarginReport {
    let mut cells = Vec::with_capacity(series.len() * specs.len());
    for s in series {
        let mut inputs = Inputs::new(&s.values);
        let label = s.label();
        for spec in specs {
            let (margin, note) = match inputs.margin(spec, opts) {
                Ok(m) => (Some(m), None),
                Err(e) => {
                    log::debug!("{label} {} {} {}: {e}", spec.model, spec.coverage, spec.side);
                    (None, Some(e.to_string()))
                }
            };
            cells.push(MarginCell {
                series: label.clone(),
                model: spec.model,
                coverage: spec.coverage,
                horizon: spec.horizon,
                waiting_days: waiting_days(spec.coverage),
                side: spec.side,
                margin,
                note,
            });
        }
    }
    MarginReport { scaling_preset: opts.scaling_preset, cells }
}
