//! Strain-energy safety filtering for a pressurised hyperelastic tube.

pub mod check;
pub mod config;
pub mod error;
pub mod hocbf;
pub mod integrator;
pub mod io;
pub mod material;
pub mod plot;
pub mod safety_filter;
pub mod tube;

pub use error::{ConfigError, Error, Result};
