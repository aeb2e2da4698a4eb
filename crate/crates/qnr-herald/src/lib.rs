//! Statistics of quasi-number-resolving (QNR) detection for heralded
//! single-photon sources.
//!
//! A thermal pair source feeds one arm of each pair into a bank of `M`
//! on-off detectors (the heralding arm is split equally across the `M`
//! modes). This crate computes the resulting m-click probabilities, the
//! photon-number distribution of the heralded arm conditioned on a single
//! click, the fidelity of that state to a one-photon Fock state, and the
//! mode count that maximizes either quantity, with detector efficiency
//! and dark counts taken into account.
//!
//! Three independent routes to the same numbers are provided:
//!
//! * [`closed_form`] — analytic expressions (inclusion-exclusion series,
//!   Stirling-number ideal limit, and exact geometric-series closed forms
//!   for the single-click case),
//! * [`oracle`] — exact combinatorial enumeration of the physical process
//!   and a seeded Monte Carlo sampler,
//! * [`optimizer`] — exhaustive integer scans over the mode count `M`,
//!   with continuous-`M` approximations reported alongside.
//!
//! The `qnr` binary exposes all of it as parameter sweeps with CSV/JSON
//! output.

pub mod closed_form;
pub mod model;
pub mod optimizer;
pub mod oracle;
mod params;

pub use params::{DetectorParams, QnrConfig, SourceParams};

/// Default relative mass allowed in the truncated thermal tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact enumeration too large: {photons} photons across {modes} modes")]
    EnumerationBound { modes: u32, photons: u32 },
    #[error("conditioning on a zero-probability event: a click can never occur with eta = 0 and delta = 0")]
    DegenerateHerald,
    #[error("dark-count probability must be positive for this quantity")]
    DarkCountRequired,
}

pub type Result<T> = std::result::Result<T, Error>;
