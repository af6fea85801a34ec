//! Tail-index estimation and the extreme-value margin.
//!
//! The Hill estimator gives `1/alpha` from the `n` largest observations.
//! Small-sample bias is removed by regressing the Hill curve
//! `1/alpha(n), n = 1..eta` on `n` with weights `sqrt(n)` and reading the
//! intercept. Left tails are handled by negating the sample.

use serde::{Deserialize, Serialize};

use crate::descstats::TestResult;
use crate::error::{Error, Result};
use crate::normal;

/// Upper bound on the default regression range.
pub const MAX_DEFAULT_ETA: usize = 1000;
/// Default exceedance fraction at which the margin threshold is placed.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    Left,
    Right,
}

impl TailSide {
    pub fn as_str(self) -> &'static str {
        match self {
            TailSide::Left => "left",
            TailSide::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha: f64,
    pub se_alpha: f64,
    pub inv_alpha: f64,
    pub se_inv_alpha: f64,
    /// Slope of the Hill curve regression.
    pub slope: f64,
    pub side: TailSide,
    /// Regression range `n = 1..eta`.
    pub eta: usize,
    /// Order statistics beyond the margin threshold.
    pub n_tail: usize,
    /// Margin threshold, in side-transformed (positive) units.
    pub threshold: f64,
    pub sample_size: usize,
}

/// `1/alpha(n)` for `n = 1..=eta`; `inv_alpha[n - 1]` holds the value for `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HillCurve {
    pub inv_alpha: Vec<f64>,
}

impl HillCurve {
    pub fn eta(&self) -> usize {
        self.inv_alpha.len()
    }

    pub fn at(&self, n: usize) -> f64 {
        self.inv_alpha[n - 1]
    }
}

/// Sorts the sample ascending after mapping it to the right tail.
pub fn side_sorted(values: &[f64], side: TailSide) -> Vec<f64> {
    let mut v: Vec<f64> = match side {
        TailSide::Right => values.to_vec(),
        TailSide::Left => values.iter().map(|x| -x).collect(),
    };
    v.sort_by(f64::total_cmp);
    v
}

fn check_tail(sorted: &[f64], n: usize) -> Result<()> {
    let big_n = sorted.len();
    if n == 0 || n >= big_n {
        return Err(Error::InvalidInput(format!("tail count {n} must be in 1..{big_n}")));
    }
    if sorted[big_n - n - 1] <= 0.0 {
        return Err(Error::NonPositiveTail);
    }
    Ok(())
}

/// Hill estimate of `1/alpha` from the `n` largest values of an ascending sample.
pub fn hill_inverse_alpha(sorted: &[f64], n: usize) -> Result<f64> {
    check_tail(sorted, n)?;
    let big_n = sorted.len();
    let reference = sorted[big_n - n - 1].ln();
    let sum: f64 = sorted[big_n - n..].iter().map(|x| x.ln() - reference).sum();
    Ok(sum / n as f64)
}

/// Asymptotic standard error of the Hill estimate, `(1/alpha) / sqrt(n)`.
pub fn hill_standard_error(inv_alpha: f64, n: usize) -> f64 {
    inv_alpha / (n as f64).sqrt()
}

pub fn hill_curve(sorted: &[f64], eta: usize) -> Result<HillCurve> {
    check_tail(sorted, eta)?;
    let big_n = sorted.len();
    let mut inv_alpha = Vec::with_capacity(eta);
    let mut log_sum = 0.0;
    for n in 1..=eta {
        log_sum += sorted[big_n - n].ln();
        let reference = sorted[big_n - n - 1].ln();
        inv_alpha.push(log_sum / n as f64 - reference);
    }
    Ok(HillCurve { inv_alpha })
}

/// `sum_{k,l} a_k b_l / max(k, l)` over 1-based indices, in linear time.
fn max_index_form(a: &[f64], b: &[f64]) -> f64 {
    let (mut a_prefix, mut b_prefix, mut total) = (0.0, 0.0, 0.0);
    for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        b_prefix += bi;
        total += (ai * b_prefix + bi * a_prefix) / (i + 1) as f64;
        a_prefix += ai;
    }
    total
}

/// Bias-corrected tail index from the weighted Hill curve regression.
///
/// The intercept's standard error uses the sandwich form with the Hill
/// estimates' own covariance, `Cov(1/alpha(k), 1/alpha(l)) = (1/alpha)^2 / max(k, l)`,
/// since the curve points share observations. The threshold is reported at
/// `n = eta`.
pub fn huisman_estimate(sorted: &[f64], eta: usize) -> Result<TailEstimate> {
    if eta < 4 {
        return Err(Error::InvalidInput(format!("eta must be at least 4, got {eta}")));
    }
    let curve = hill_curve(sorted, eta)?;

    let (mut s0, mut s1, mut s2, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &y) in curve.inv_alpha.iter().enumerate() {
        let x = (i + 1) as f64;
        let w = x.sqrt();
        s0 += w;
        s1 += w * x;
        s2 += w * x * x;
        sy += w * y;
        sxy += w * x * y;
    }
    let det = s0 * s2 - s1 * s1;
    let intercept = (s2 * sy - s1 * sxy) / det;
    let slope = (s0 * sxy - s1 * sy) / det;
    if !(intercept > 0.0) {
        return Err(Error::Estimation(format!(
            "regression intercept {intercept:.4} is not positive at eta = {eta}"
        )));
    }

    // row of (X'WX)^-1 belonging to the intercept
    let (r0, r1) = (s2 / det, -s1 / det);
    let u: Vec<f64> = (1..=eta).map(|n| (n as f64).sqrt()).collect();
    let v: Vec<f64> = (1..=eta).map(|n| (n as f64).powf(1.5)).collect();
    let m00 = max_index_form(&u, &u);
    let m01 = max_index_form(&u, &v);
    let m11 = max_index_form(&v, &v);
    let var_unit = r0 * r0 * m00 + 2.0 * r0 * r1 * m01 + r1 * r1 * m11;
    let se_inv_alpha = intercept * var_unit.max(0.0).sqrt();

    let alpha = 1.0 / intercept;
    Ok(TailEstimate {
        alpha,
        se_alpha: alpha * alpha * se_inv_alpha,
        inv_alpha: intercept,
        se_inv_alpha,
        slope,
        side: TailSide::Right,
        eta,
        n_tail: eta,
        threshold: sorted[sorted.len() - eta - 1],
        sample_size: sorted.len(),
    })
}

/// `min(floor(N+ / 2), 1000)` where `N+` counts the strictly positive values.
pub fn default_eta(sorted: &[f64]) -> usize {
    let positives = sorted.len() - sorted.partition_point(|&x| x <= 0.0);
    (positives / 2).min(MAX_DEFAULT_ETA)
}

impl TailEstimate {
    /// Moves the margin threshold to the `n_tail`-th largest observation,
    /// keeping the tail index.
    pub fn with_threshold(&self, sorted: &[f64], n_tail: usize) -> Result<TailEstimate> {
        check_tail(sorted, n_tail)?;
        Ok(TailEstimate { n_tail, threshold: sorted[sorted.len() - n_tail - 1], ..self.clone() })
    }

    /// Largest exceedance probability the tail model covers, `n_tail / N`.
    pub fn max_exceedance(&self) -> f64 {
        self.n_tail as f64 / self.sample_size as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// Regression range; `None` uses [`default_eta`].
    pub eta: Option<usize>,
    /// Margin threshold at `ceil(fraction * N)` order statistics; `None`
    /// keeps the threshold at `eta`.
    pub threshold_fraction: Option<f64>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { eta: None, threshold_fraction: Some(DEFAULT_THRESHOLD_FRACTION) }
    }
}

/// Estimates one tail of a return sample.
pub fn estimate_tail(values: &[f64], side: TailSide, opts: &TailOptions) -> Result<TailEstimate> {
    let sorted = side_sorted(values, side);
    let eta = opts.eta.unwrap_or_else(|| default_eta(&sorted));
    let mut est = huisman_estimate(&sorted, eta)?;
    est.side = side;
    if let Some(f) = opts.threshold_fraction {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidInput(format!("threshold fraction {f} outside (0, 1)")));
        }
        let n_tail = ((f * sorted.len() as f64).ceil() as usize).max(1);
        est = est.with_threshold(&sorted, n_tail)?;
    }
    Ok(est)
}

/// `(alpha - k) / se`, the upper-tail p-value `P(Z > z)`, and the
/// table-convention value `max(Phi(z) - 0.5, 0)`.
pub fn moment_test_statistic(alpha: f64, se_alpha: f64, k: f64) -> (f64, f64, f64) {
    let z = (alpha - k) / se_alpha;
    let phi = normal::cdf(z);
    (z, 1.0 - phi, (phi - 0.5).max(0.0))
}

/// Test of the existence of the moment of order `k` (2 or 4).
///
/// `p_value` is `P(Z > z)`; the parameter `table_p` carries
/// `max(Phi(z) - 0.5, 0)`, the convention of the published tables.
pub fn moment_existence_test(est: &TailEstimate, k: u32) -> Result<TestResult> {
    if !(est.se_alpha > 0.0) {
        return Err(Error::InvalidInput("standard error must be positive".into()));
    }
    let (z, p_upper, table_p) = moment_test_statistic(est.alpha, est.se_alpha, k as f64);
    Ok(TestResult {
        test_name: "moment_existence".into(),
        statistic: z,
        p_value: p_upper,
        parameters: vec![("order".into(), k as f64), ("table_p".into(), table_p)],
    })
}

/// Margin at exceedance probability `p_exc`: `r_th * (n / (N p_exc))^(1/alpha)`.
pub fn evt_margin(est: &TailEstimate, p_exc: f64) -> Result<f64> {
    let max = est.max_exceedance();
    if !(p_exc > 0.0) || p_exc > max * (1.0 + 1e-12) {
        return Err(Error::OutOfTail { p_exc, max });
    }
    let base = est.n_tail as f64 / (est.sample_size as f64 * p_exc);
    Ok(est.threshold * base.powf(1.0 / est.alpha))
}

/// Time aggregation of a tail quantile, `T^(1/alpha) * ml_1`.
pub fn feller_scale(ml_1: f64, horizon: f64, alpha: f64) -> f64 {
    horizon.powf(1.0 / alpha) * ml_1
}
