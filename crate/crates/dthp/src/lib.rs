//! Discrete-time Hawkes processes with trans-dimensional histogram triggering kernels.
//!
//! A discrete-time Hawkes process (DTHP) models daily event counts where the
//! expected count on day `t` is a baseline rate plus weighted contributions
//! from counts on earlier days. The triggering kernel that carries those
//! weights is either a normalised step function with a random number of steps
//! at random integer knot locations, inferred by reversible-jump MCMC, or a
//! truncated geometric kernel fitted as a parametric baseline.
//!
//! The crate is organised along the pipeline:
//!
//! * [`series`], [`kernel`], [`model`] — domain types;
//! * [`likelihood`] — conditional intensities, the exact Poisson
//!   log-likelihood, and the lag-count cache that accelerates both;
//! * [`simulate`] — forward simulation of count series;
//! * [`prior`] — log-priors for the continuous parameters and the discrete
//!   histogram structure;
//! * [`mcmc`] — the reversible-jump sampler, chain orchestration, and the
//!   geometric-kernel sampler;
//! * [`analysis`] — posterior bands, RMSE, static-parameter summaries, and
//!   convergence diagnostics;
//! * [`io`] — CSV ingestion, rolling smoothing, phase splitting, run
//!   configuration, and trace serialization.

pub mod analysis;
pub mod error;
pub mod io;
pub mod kernel;
pub mod likelihood;
pub mod mcmc;
pub mod model;
pub mod prior;
pub mod rng;
pub mod series;
pub mod simulate;
pub mod stats;

pub use error::DthpError;
pub use kernel::{GeometricKernel, HistogramKernel, Kernel};
pub use model::DthpModel;
pub use series::CountSeries;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, DthpError>;
