//! Heavy-tailed centrality analysis of daily origin-destination networks
//! with the beta rank function (BRF / DGBD) distribution.
//!
//! The crate covers the full analysis chain:
//!
//! - [`distributions`] — the BRF family (quantile, CDF, log-density, mode,
//!   moments, sampling) and the power-law / lognormal competitors;
//! - [`fitting`] — rank-size construction and Levenberg–Marquardt /
//!   closed-form model fits;
//! - [`model_selection`] — Kolmogorov–Smirnov statistics, AIC and the
//!   three-model comparison verdict;
//! - [`od_network`] — edgelist ingestion, degree/strength centralities and
//!   in/out diagnostics;
//! - [`regimes`] — high/low mobility classification against the
//!   distribution mode, switching, concordance and hub rankings;
//! - [`covariates`] — covariate joins, rank-sum tests and logistic
//!   regression;
//! - [`pipeline`] — batch orchestration over a year of daily networks,
//!   synthetic data generation and plot-ready CSV emission.
//!
//! Per-day computations are embarrassingly parallel; with the default
//! `parallel` feature they fan out over a rayon pool, and outputs are
//! byte-identical to a serial run.

pub mod covariates;
pub mod distributions;
pub mod error;
pub mod fitting;
mod linalg;
pub mod model_selection;
pub mod od_network;
pub mod pipeline;
pub mod regimes;
pub mod special;

pub use error::{Error, Result};
