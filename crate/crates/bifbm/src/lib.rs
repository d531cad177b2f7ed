//! Simulation and path analysis of bifractional Brownian motion.
//!
//! The crate covers the covariance layer (kernels, Lamperti transform,
//! spectral density), exact and approximate samplers, pathwise estimators
//! (local times, small deviations, fractal dimensions), a truncated chaos
//! expansion of the local time, and machine-checkable experiment reports.

pub mod chaos;
pub mod covariance;
pub mod error;
pub mod estimators;
pub mod io;
pub mod params;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod stats;

pub use error::{BifbmError, Result};
pub use params::{BifBmParams, SheetParams, TimeGrid};
