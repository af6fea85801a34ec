//! Standard normal helpers shared by the margin models and the tests.

use statrs::distribution::{ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// Standard normal quantile, `N^{-1}(p)`.
pub fn quantile(p: f64) -> f64 {
    standard().inverse_cdf(p)
}
