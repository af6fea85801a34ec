//! GARCH(1,1) with Gaussian innovations, fitted by maximum likelihood.
//!
//! `sigma2_t = alpha0 + alpha1 * eps_{t-1}^2 + beta1 * sigma2_{t-1}` with
//! `eps_t = r_t - mu`, `mu` the sample mean and `sigma2_1` the sample
//! variance. The optimiser works on an unconstrained reparameterisation so
//! every iterate satisfies `alpha0 > 0`, `alpha1, beta1 >= 0`,
//! `alpha1 + beta1 <= 1`.

use serde::{Deserialize, Serialize};

use crate::descstats::{mean, std_dev};
use crate::error::{Error, Result};
use crate::margins::{normal_margin, Side};

pub const MIN_OBSERVATIONS: usize = 100;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub mu: f64,
}

impl GarchParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha0 > 0.0
            && self.alpha1 >= 0.0
            && self.beta1 >= 0.0
            && self.alpha1 + self.beta1 <= 1.0
            && self.mu.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("infeasible GARCH(1,1) parameters {self:?}")))
        }
    }

    pub fn persistence(&self) -> f64 {
        self.alpha1 + self.beta1
    }

    /// `alpha0 / (1 - alpha1 - beta1)` when the process is covariance stationary.
    pub fn unconditional_variance(&self) -> Option<f64> {
        let p = self.persistence();
        (p < 1.0).then(|| self.alpha0 / (1.0 - p))
    }

    /// One-step variance forecast.
    pub fn forecast(&self, last_eps2: f64, last_sigma2: f64) -> f64 {
        self.alpha0 + self.alpha1 * last_eps2 + self.beta1 * last_sigma2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GarchParams,
    pub sigma2_path: Vec<f64>,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Squared residual of the final observation.
    pub last_eps2: f64,
}

impl GarchFit {
    /// Conditional variance for the period after the sample.
    pub fn next_sigma2(&self) -> f64 {
        let last = *self.sigma2_path.last().expect("fit has at least one observation");
        forecast_sigma2(self, self.last_eps2, last)
    }
}

pub fn forecast_sigma2(fit: &GarchFit, last_eps2: f64, last_sigma2: f64) -> f64 {
    fit.params.forecast(last_eps2, last_sigma2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: DEFAULT_MAX_ITER }
    }
}

/// Conditional variances for residuals `eps`, starting from `sigma2_0`.
pub fn variance_path(params: &GarchParams, eps: &[f64], sigma2_0: f64) -> Vec<f64> {
    let mut path = Vec::with_capacity(eps.len());
    let mut s2 = sigma2_0;
    let mut prev: Option<f64> = None;
    for &e in eps {
        if let Some(p) = prev {
            s2 = params.forecast(p * p, s2);
        }
        path.push(s2);
        prev = Some(e);
    }
    path
}

/// Gaussian log-likelihood of the residuals under `params`.
pub fn log_likelihood(params: &GarchParams, eps: &[f64], sigma2_0: f64) -> f64 {
    const LN_2PI: f64 = 1.837_877_066_409_345_3;
    let mut s2 = sigma2_0;
    let mut ll = 0.0;
    let mut prev = 0.0;
    for (t, &e) in eps.iter().enumerate() {
        if t > 0 {
            s2 = params.alpha0 + params.alpha1 * prev * prev + params.beta1 * s2;
        }
        if !(s2 > 0.0 && s2.is_finite()) {
            return f64::NEG_INFINITY;
        }
        ll -= 0.5 * (LN_2PI + s2.ln() + e * e / s2);
        prev = e;
    }
    ll
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained coordinates: log level relative to the sample variance,
/// logit persistence, logit ARCH share of the persistence.
fn to_params(theta: &[f64; 3], var: f64, mu: f64) -> GarchParams {
    let persistence = logistic(theta[1]);
    let share = logistic(theta[2]);
    GarchParams {
        alpha0: var * theta[0].exp(),
        alpha1: persistence * share,
        beta1: persistence * (1.0 - share),
        mu,
    }
}

fn to_theta(p: &GarchParams, var: f64) -> [f64; 3] {
    let persistence = p.alpha1 + p.beta1;
    [(p.alpha0 / var).ln(), logit(persistence), logit(p.alpha1 / persistence)]
}

/// Fits GARCH(1,1) by maximum likelihood.
///
/// Starts from `alpha0 = 0.05 var`, `alpha1 = 0.05`, `beta1 = 0.90`. If the
/// iteration budget runs out the best point found is returned with
/// `converged = false`.
pub fn fit_garch11(values: &[f64], opts: &FitOptions) -> Result<GarchFit> {
    let n = values.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    let mu = mean(values);
    let var = std_dev(values).powi(2);
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let eps: Vec<f64> = values.iter().map(|r| r - mu).collect();

    let init = GarchParams { alpha0: 0.05 * var, alpha1: 0.05, beta1: 0.90, mu };
    let initial_log_likelihood = log_likelihood(&init, &eps, var);
    // optimize on standardized residuals so the search path does not depend on the units
    let sd = var.sqrt();
    let z: Vec<f64> = eps.iter().map(|e| e / sd).collect();
    let objective = |theta: &[f64; 3]| -log_likelihood(&to_params(theta, 1.0, 0.0), &z, 1.0);

    let mut theta = to_theta(&init, var);
    let mut iterations = 0;
    let mut converged = false;
    // a fresh simplex around the previous optimum guards against early collapse
    while iterations < opts.max_iter {
        let run = nelder_mead(&objective, theta, 0.5, opts.max_iter - iterations);
        iterations += run.iterations;
        let moved = theta.iter().zip(&run.x).any(|(a, b)| (a - b).abs() > 1e-6);
        theta = run.x;
        converged = run.converged;
        if !converged || !moved {
            break;
        }
    }

    let params = to_params(&theta, var, mu);
    let sigma2_path = variance_path(&params, &eps, var);
    let log_likelihood = log_likelihood(&params, &eps, var);
    let last = eps[n - 1];
    Ok(GarchFit {
        params,
        sigma2_path,
        log_likelihood,
        initial_log_likelihood,
        converged,
        iterations,
        last_eps2: last * last,
    })
}

/// Margin from the one-step conditional volatility, `|mu T + q sigma_{t+1} sqrt(T)|`.
pub fn garch_margin(fit: &GarchFit, coverage: f64, horizon: f64, side: Side) -> Result<f64> {
    normal_margin(fit.params.mu, fit.next_sigma2().sqrt(), coverage, horizon, side)
}

struct NelderMeadRun {
    x: [f64; 3],
    iterations: usize,
    converged: bool,
}

fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(f: &F, start: [f64; 3], step: f64, max_iter: usize) -> NelderMeadRun {
    const F_TOL: f64 = 1e-11;
    const X_TOL: f64 = 1e-4;
    let eval = |x: &[f64; 3]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, eval(&start)));
    for i in 0..3 {
        let mut x = start;
        x[i] += step;
        simplex.push((x, eval(&x)));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = simplex[3].1 - simplex[0].1;
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= F_TOL * (1.0 + simplex[0].1.abs()) && x_spread <= X_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; 3];
        for (x, _) in &simplex[..3] {
            for i in 0..3 {
                centroid[i] += x[i] / 3.0;
            }
        }
        let along = |t: f64| -> [f64; 3] {
            let worst = simplex[3].0;
            [0, 1, 2].map(|i| centroid[i] + t * (worst[i] - centroid[i]))
        };

        let reflected = along(-1.0);
        let f_r = eval(&reflected);
        if f_r < simplex[0].1 {
            let expanded = along(-2.0);
            let f_e = eval(&expanded);
            simplex[3] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
        } else if f_r < simplex[2].1 {
            simplex[3] = (reflected, f_r);
        } else {
            let (contracted, f_c) = if f_r < simplex[3].1 {
                let c = along(-0.5);
                (c, eval(&c))
            } else {
                let c = along(0.5);
                (c, eval(&c))
            };
            if f_c < simplex[3].1.min(f_r) {
                simplex[3] = (contracted, f_c);
            } else {
                let best = simplex[0].0;
                for (x, fx) in simplex.iter_mut().skip(1) {
                    *x = [0, 1, 2].map(|i| best[i] + 0.5 * (x[i] - best[i]));
                    *fx = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NelderMeadRun { x: simplex[0].0, iterations, converged }
}
