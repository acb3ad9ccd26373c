//! Fourier-z pricing of discretely monitored α-quantile options and perpetual
//! Bermudan/American puts under exponential Lévy models.
//!
//! Distributions of extrema and first-passage quantities come from the Spitzer
//! identities, evaluated through a numerical Wiener–Hopf factorisation on a
//! uniform log-price grid. The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use spitzer_core::prelude::*;
//!
//! let model = LevyModel::new(Process::Gaussian { sigma: 0.4 }, 0.05).unwrap();
//! let contract = PerpetualPut::new(model, 1.0, 1.0, Monitoring::Discrete(1.0)).unwrap();
//! let numerics = PerpetualNumerics::with_grid(1 << 14);
//! let res = price_perpetual(&contract, &numerics, Method::Spitzer).unwrap();
//! assert!((res.price - 0.331811).abs() < 1e-5);
//! ```
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod early_exercise;
mod error;
pub mod exec;
pub mod fft;
pub mod grid;
pub mod inverse_z;
pub mod mc;
pub mod payoffs;
pub mod processes;
pub mod quantile;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub mod prelude {
    pub use crate::early_exercise::{
        price_perpetual, truncation_bound, Method, Monitoring, PerpetualNumerics, PerpetualPut,
        PerpetualResult,
    };
    pub use crate::exec::{Executor, Serial};
    pub use crate::grid::{Grid, Spectral};
    pub use crate::inverse_z::ZPlan;
    pub use crate::payoffs::{OptionKind, PayoffSpec};
    pub use crate::processes::{LevyModel, Process};
    pub use crate::quantile::{price_quantile, QuantileContract, QuantileNumerics, QuantileResult};
    pub use crate::wiener_hopf::{HilbertKernel, WienerHopf};
    pub use crate::{Complex64, Error, Result};
}
