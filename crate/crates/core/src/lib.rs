//! Futures margin requirements from tick-level price data.
//!
//! The crate turns raw trades into anchored daily and intraday return
//! series, summarises them, estimates tail indices and GARCH(1,1)
//! dynamics, and assembles margin levels under four models (Gaussian,
//! extreme value, historical and GARCH), including the comparison between
//! scaled intraday margins and directly estimated daily margins.
//!
//! All returns are log price changes expressed in percent.

pub mod descstats;
pub mod error;
pub mod export;
pub mod garch;
pub mod margins;
pub mod marketdata;
pub mod normal;
pub mod synth;
pub mod tails;

pub use error::{Error, Result};
