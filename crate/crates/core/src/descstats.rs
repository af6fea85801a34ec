//! Moments, order-statistic quantiles, and the normality and white-noise
//! tests used for the descriptive tables.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::normal;
use crate::synth::seeded_rng;

/// Default Monte Carlo repetitions for the KS null distribution.
pub const DEFAULT_KS_REPS: usize = 10_000;
/// Default Ljung-Box lag count.
pub const DEFAULT_LB_LAGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub parameters: Vec<(String, f64)>,
}

impl TestResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the n-1 denominator.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

pub fn moment_summary(values: &[f64]) -> Result<MomentSummary> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let nf = n as f64;
    let m = mean(values);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in values {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p| sorted[nearest_rank(n, p) - 1];
    Ok(MomentSummary {
        n,
        mean: m,
        std_dev,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        min: sorted[0],
        q25: q(0.25),
        median: q(0.5),
        q75: q(0.75),
        max: sorted[n - 1],
    })
}

/// Smallest rank `k` in `1..=n` with `k / n >= q`.
pub(crate) fn nearest_rank(n: usize, q: f64) -> usize {
    let nf = n as f64;
    let mut k = ((q * nf).ceil().max(0.0) as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / nf >= q {
        k -= 1;
    }
    while k < n && (k as f64) / nf < q {
        k += 1;
    }
    k
}

/// Nearest-rank order statistic; `q = 0` is the minimum, `q = 1` the maximum.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidInput(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[nearest_rank(sorted.len(), q) - 1])
}

/// `sup |F_n(x) - Phi((x - mean) / sd)|` with mean and sd estimated from the sample.
pub fn ks_statistic(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let m = mean(values);
    let s = std_dev(values);
    if !(s > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ks_sorted(&sorted, m, s))
}

fn ks_sorted(sorted: &[f64], m: f64, s: f64) -> f64 {
    let nf = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = normal::cdf((x - m) / s);
        let above = (i + 1) as f64 / nf - f;
        let below = f - i as f64 / nf;
        d.max(above).max(below)
    })
}

/// Simulated distribution of the KS statistic under a normal law with
/// estimated mean and variance. It depends only on the sample size, so one
/// table can serve many series of the same length.
#[derive(Debug, Clone)]
pub struct LillieforsNull {
    n: usize,
    seed: u64,
    sorted_stats: Vec<f64>,
}

impl LillieforsNull {
    pub fn simulate(n: usize, reps: usize, seed: u64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InsufficientData { needed: 8, got: n });
        }
        if reps == 0 {
            return Err(Error::InvalidInput("mc_reps must be positive".into()));
        }
        let mut rng = seeded_rng(seed);
        let mut buf = vec![0.0; n];
        let mut stats = Vec::with_capacity(reps);
        for _ in 0..reps {
            for x in buf.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let m = mean(&buf);
            let s = std_dev(&buf);
            buf.sort_by(f64::total_cmp);
            stats.push(ks_sorted(&buf, m, s));
        }
        stats.sort_by(f64::total_cmp);
        Ok(Self { n, seed, sorted_stats: stats })
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn reps(&self) -> usize {
        self.sorted_stats.len()
    }

    /// `(1 + #{D_sim >= d}) / (reps + 1)`.
    pub fn p_value(&self, d: f64) -> f64 {
        let below = self.sorted_stats.partition_point(|&s| s < d);
        let at_or_above = self.sorted_stats.len() - below;
        (1 + at_or_above) as f64 / (self.sorted_stats.len() + 1) as f64
    }
}

/// KS normality test with a Monte Carlo p-value from `null`.
pub fn ks_normality_with_null(values: &[f64], null: &LillieforsNull) -> Result<TestResult> {
    if values.len() != null.n {
        return Err(Error::InvalidInput(format!(
            "null table built for n = {}, series has n = {}",
            null.n,
            values.len()
        )));
    }
    let d = ks_statistic(values)?;
    Ok(TestResult {
        test_name: "kolmogorov_smirnov".into(),
        statistic: d,
        p_value: null.p_value(d),
        parameters: vec![("mc_reps".into(), null.reps() as f64), ("seed".into(), null.seed as f64)],
    })
}

/// KS normality test; the null is simulated with `mc_reps` seeded draws.
pub fn ks_normality(values: &[f64], mc_reps: usize, seed: u64) -> Result<TestResult> {
    if values.len() < 8 {
        return Err(Error::InsufficientData { needed: 8, got: values.len() });
    }
    // fail on degenerate input before paying for the simulation
    ks_statistic(values)?;
    let null = LillieforsNull::simulate(values.len(), mc_reps, seed)?;
    ks_normality_with_null(values, &null)
}

/// Sample autocorrelations at lags `1..=lags`.
pub fn autocorrelations(values: &[f64], lags: usize) -> Result<Vec<f64>> {
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|x| x - m).collect();
    let denom: f64 = centered.iter().map(|x| x * x).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((1..=lags)
        .map(|k| centered[k..].iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect())
}

/// Ljung-Box portmanteau test with a chi-square(`lags`) p-value.
pub fn ljung_box(values: &[f64], lags: usize) -> Result<TestResult> {
    let n = values.len();
    if lags == 0 {
        return Err(Error::InvalidInput("lags must be positive".into()));
    }
    if n <= lags + 1 {
        return Err(Error::InsufficientData { needed: lags + 2, got: n });
    }
    let rho = autocorrelations(values, lags)?;
    let nf = n as f64;
    let q = nf * (nf + 2.0)
        * rho.iter().enumerate().map(|(i, r)| r * r / (nf - (i + 1) as f64)).sum::<f64>();
    Ok(TestResult {
        test_name: "ljung_box".into(),
        statistic: q,
        p_value: chi_square_sf(q, lags),
        parameters: vec![("lags".into(), lags as f64)],
    })
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(q: f64, df: usize) -> f64 {
    let chi = ChiSquared::new(df as f64).expect("df > 0");
    chi.sf(q).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_three_points() {
        // n >= 4 is required for kurtosis, so pad symmetrically
        let s = moment_summary(&[-1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.skewness, 0.0);
        assert!(matches!(moment_summary(&[-1.0, 0.0, 1.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn constant_series_errors() {
        assert!(matches!(moment_summary(&[2.0; 5]), Err(Error::ZeroVariance)));
        assert!(matches!(ks_normality(&[0.0; 20], 10, 1), Err(Error::ZeroVariance)));
        assert!(matches!(ljung_box(&[1.0; 30], 5), Err(Error::ZeroVariance)));
    }

    #[test]
    fn known_moments() {
        // {1, 2, 3, 4, 10}: mean 4, central sums 50 / 180 / 1394 (hand-computed)
        let s = moment_summary(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert!((s.mean - 4.0).abs() < 1e-12);
        assert!((s.std_dev - (50.0f64 / 4.0).sqrt()).abs() < 1e-12);
        let (m2, m3, m4) = (10.0f64, 180.0 / 5.0, 1394.0 / 5.0);
        assert!((s.skewness - m3 / m2.powf(1.5)).abs() < 1e-12);
        assert!((s.excess_kurtosis - (m4 / (m2 * m2) - 3.0)).abs() < 1e-12);
        assert_eq!((s.min, s.median, s.max), (1.0, 3.0, 10.0));
    }

    #[test]
    fn quantile_edges() {
        let v: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.25).unwrap(), 25.0);
        assert_eq!(empirical_quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&v, 1.0).unwrap(), 100.0);
        assert!(empirical_quantile(&[], 0.5).is_err());
        assert!(empirical_quantile(&v, 1.5).is_err());
    }

    #[test]
    fn nearest_rank_matches_predicate_scan() {
        for n in 1..200 {
            for &q in &[0.0, 0.01, 0.25, 0.5, 0.9, 0.95, 0.99, 0.996, 0.998, 1.0] {
                let scan = (1..=n).find(|&k| k as f64 / n as f64 >= q).unwrap_or(n);
                assert_eq!(nearest_rank(n, q), scan, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn ljung_box_zero_autocorrelation() {
        // only the lag n-1 product is non-zero, which is beyond 20 lags
        let mut v = vec![0.0; 25];
        v[0] = 1.0;
        v[24] = -1.0;
        let r = ljung_box(&v, 20).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(ljung_box(&v, 24).is_err());
    }

    #[test]
    fn chi_square_reference_value() {
        // Q = 26.29 on 20 lags
        assert!((chi_square_sf(26.29, 20) - 0.157).abs() < 1e-3);
    }

    #[test]
    fn ks_ramp_against_brute_force_sup() {
        let v: Vec<f64> = (1..=50).map(f64::from).collect();
        let m = 25.5;
        let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 49.0).sqrt();
        // brute force: evaluate |F_n - Phi| just below and at every jump
        let mut brute: f64 = 0.0;
        for &x in &v {
            let f = normal::cdf((x - m) / s);
            let left = v.iter().filter(|&&y| y < x).count() as f64 / 50.0;
            let right = v.iter().filter(|&&y| y <= x).count() as f64 / 50.0;
            brute = brute.max((left - f).abs()).max((right - f).abs());
        }
        let d = ks_statistic(&v).unwrap();
        assert!((d - brute).abs() < 1e-12, "{d} vs {brute}");
        assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn ks_p_value_in_unit_interval() {
        let v: Vec<f64> = (1..=50).map(|i| (i as f64).sin()).collect();
        let r = ks_normality(&v, 200, 3).unwrap();
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        assert_eq!(r.param("mc_reps"), Some(200.0));
    }
}
