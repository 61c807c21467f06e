//! Outage analysis of two-user downlink NOMA with transmit antenna selection
//! and multi-antenna (EGC/MRC) receivers over i.i.d. α-μ fading.
//!
//! The crate is organised bottom-up:
//!
//! - [`fading`]: α-μ envelope density, distribution, moments and sampling.
//! - [`series`]: power-series representation of the post-combining SNR of a
//!   single antenna (Φ₁) and of the TAS-selected antenna (Φ₂), kept in
//!   sign/log-magnitude form and evaluated with compensated summation.
//! - [`outage`]: exact and asymptotic outage probabilities, diversity and
//!   coding gains, SNR sweeps.
//! - [`sim`]: an independent Monte Carlo oracle with reproducible per-trial
//!   random streams.
//! - [`cli`]: JSON run configuration, CSV emission and the `tasnoma` driver.

pub mod cli;
pub mod error;
pub mod fading;
pub mod outage;
pub mod series;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use fading::AlphaMuParams;
pub use outage::{OutageAnalysis, OutageReport, SystemConfig};
pub use series::{Combiner, SeriesCoefficients, SeriesOptions, TasCoefficients};
pub use sim::{McConfig, McEstimate};
