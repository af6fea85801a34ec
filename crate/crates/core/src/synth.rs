//! Seeded synthetic data: iid draws, GARCH(1,1) paths and tick-level
//! random walks on the session grid.
//!
//! Every generator draws from [`seeded_rng`], a ChaCha8 stream from
//! `rand_chacha` 0.9, so a (spec, seed) pair reproduces the same output on
//! any machine.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Pareto, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::GarchParams;
use crate::marketdata::{DeliveryMonth, Frequency, ReturnSeries, Tick, TickSeries, TradingCalendar};

/// Name of the generator behind every seeded stream, recorded in outputs.
pub const RNG_NAME: &str = "chacha8/rand_chacha-0.9";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    GaussianIid { mu: f64, sigma: f64 },
    StudentT { dof: f64, scale: f64 },
    Pareto { alpha: f64, scale: f64 },
    Garch11 { params: GarchParams },
    /// Log-price random walk sampled every `step_minutes` on the session
    /// grid; `length` counts trading days (weekdays from `start`).
    TickWalk {
        start: NaiveDate,
        start_price: f64,
        /// Per-step log-return standard deviation, percent.
        step_sigma: f64,
        /// Close-to-open log-return standard deviation, percent.
        overnight_sigma: f64,
        step_minutes: i64,
        delivery_month: DeliveryMonth,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Returns(ReturnSeries),
    Ticks(TickSeries),
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.length == 0 {
            return bad("length must be at least 1");
        }
        match &self.kind {
            GeneratorKind::GaussianIid { mu, sigma } => {
                if !(mu.is_finite() && *sigma > 0.0 && sigma.is_finite()) {
                    return bad("gaussian needs finite mu and sigma > 0");
                }
            }
            GeneratorKind::StudentT { dof, scale } => {
                if !(*dof > 0.0 && *scale > 0.0) {
                    return bad("student_t needs dof > 0 and scale > 0");
                }
            }
            GeneratorKind::Pareto { alpha, scale } => {
                if !(*alpha > 0.0 && *scale > 0.0) {
                    return bad("pareto needs alpha > 0 and scale > 0");
                }
            }
            GeneratorKind::Garch11 { params } => params.validate()?,
            GeneratorKind::TickWalk { start_price, step_sigma, overnight_sigma, step_minutes, .. } => {
                if !(*start_price > 0.0 && *step_sigma >= 0.0 && *overnight_sigma >= 0.0 && *step_minutes > 0) {
                    return bad("tick_walk needs start_price > 0, non-negative sigmas and step_minutes > 0");
                }
            }
        }
        Ok(())
    }
}

/// Runs a generator. Tick walks use the default trading calendar.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    generate_with_calendar(spec, &TradingCalendar::default())
}

pub fn generate_with_calendar(spec: &GeneratorSpec, cal: &TradingCalendar) -> Result<Generated> {
    spec.validate()?;
    let n = spec.length;
    let seed = spec.seed;
    let returns = |v| Ok(Generated::Returns(ReturnSeries::from_values(Frequency::Daily, v)));
    match &spec.kind {
        GeneratorKind::GaussianIid { mu, sigma } => returns(gaussian_iid(n, *mu, *sigma, seed)),
        GeneratorKind::StudentT { dof, scale } => {
            returns(student_t(n, *dof, seed).into_iter().map(|x| x * scale).collect())
        }
        GeneratorKind::Pareto { alpha, scale } => returns(pareto(n, *alpha, *scale, seed)),
        GeneratorKind::Garch11 { params } => returns(garch11(params, n, seed).0),
        GeneratorKind::TickWalk { start, start_price, step_sigma, overnight_sigma, step_minutes, delivery_month } => {
            let walk = TickWalk {
                start: *start,
                start_price: *start_price,
                step_sigma: *step_sigma,
                overnight_sigma: *overnight_sigma,
                step_minutes: *step_minutes,
                delivery_month: *delivery_month,
            };
            Ok(Generated::Ticks(walk.generate(cal, n, seed)?))
        }
    }
}

pub fn gaussian_iid(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let dist = Normal::new(mu, sigma).expect("validated normal parameters");
    dist.sample_iter(seeded_rng(seed)).take(n).collect()
}

pub fn student_t(n: usize, dof: f64, seed: u64) -> Vec<f64> {
    let dist = StudentT::new(dof).expect("dof > 0");
    dist.sample_iter(seeded_rng(seed)).take(n).collect()
}

pub fn pareto(n: usize, alpha: f64, scale: f64, seed: u64) -> Vec<f64> {
    let dist = Pareto::new(scale, alpha).expect("validated pareto parameters");
    dist.sample_iter(seeded_rng(seed)).take(n).collect()
}

/// Simulates `r_t = mu + sigma_t z_t` with the GARCH(1,1) variance
/// recursion, started at the unconditional variance when it exists.
/// Returns the returns and the conditional variance path.
pub fn garch11(params: &GarchParams, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = seeded_rng(seed);
    let mut sigma2 = params.unconditional_variance().unwrap_or(params.alpha0);
    let mut eps_prev = 0.0;
    let mut returns = Vec::with_capacity(n);
    let mut path = Vec::with_capacity(n);
    for t in 0..n {
        if t > 0 {
            sigma2 = params.alpha0 + params.alpha1 * eps_prev * eps_prev + params.beta1 * sigma2;
        }
        let z: f64 = rng.sample(StandardNormal);
        let eps = sigma2.sqrt() * z;
        returns.push(params.mu + eps);
        path.push(sigma2);
        eps_prev = eps;
    }
    (returns, path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickWalk {
    pub start: NaiveDate,
    pub start_price: f64,
    pub step_sigma: f64,
    pub overnight_sigma: f64,
    pub step_minutes: i64,
    pub delivery_month: DeliveryMonth,
}

impl TickWalk {
    /// Emits one trade at every grid point from open to close on each of
    /// `days` consecutive weekdays that the calendar does not exclude.
    pub fn generate(&self, cal: &TradingCalendar, days: usize, seed: u64) -> Result<TickSeries> {
        cal.validate()?;
        let mut rng = seeded_rng(seed);
        let step = Normal::new(0.0, self.step_sigma / 100.0)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let overnight = Normal::new(0.0, self.overnight_sigma / 100.0)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;

        let mut log_price = self.start_price.ln();
        let mut ticks = Vec::new();
        let mut date = self.start;
        let mut produced = 0;
        while produced < days {
            let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
            if !weekend && !cal.is_excluded(date) {
                if produced > 0 {
                    log_price += overnight.sample(&mut rng);
                }
                let mut time = cal.session_open;
                loop {
                    ticks.push(Tick {
                        timestamp: NaiveDateTime::new(date, time),
                        price: log_price.exp(),
                        volume: rng.random_range(1..=50),
                        delivery_month: self.delivery_month,
                    });
                    let (next, wrapped) = time.overflowing_add_signed(Duration::minutes(self.step_minutes));
                    if wrapped != 0 || next > cal.session_close {
                        break;
                    }
                    time = next;
                    log_price += step.sample(&mut rng);
                }
                produced += 1;
            }
            date = date.succ_opt().ok_or_else(|| Error::InvalidInput("date overflow".into()))?;
        }
        TickSeries::new(ticks)
    }
}
