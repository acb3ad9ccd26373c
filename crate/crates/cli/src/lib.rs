//! Config-driven runner for `spitzer-core`: single pricings, grid sweeps,
//! Monte Carlo checks and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod exec;
pub mod run;

pub use config::{Resolved, RunConfig};
pub use error::{CliError, Result};
