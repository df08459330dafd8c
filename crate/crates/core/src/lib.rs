//! Parallel dither for ReLU networks.
//!
//! Two experiments share one crate:
//!
//! - [`signal`]: a ReLU rectifies an amplitude-modulated tone, once directly
//!   and once as the average of many independently dithered copies. Welch
//!   spectra of both show the demodulated line and the distortion products
//!   that dither suppresses.
//! - [`nn`], [`regularize`], [`trainer`]: a 784×100×10 ReLU network trained by
//!   per-example SGD on the first 256 MNIST digits under four regimes
//!   (baseline, dropout, 100× parallel dither, parallel dither with dropout),
//!   all from the same starting weights.
//!
//! All randomness comes from named counter-style streams ([`rng`]), so every
//! run is bit-reproducible regardless of the worker count.
//!
//! ```no_run
//! use ditherlab::signal::{run_demod, DemodConfig};
//!
//! let result = run_demod(&DemodConfig::default()).unwrap();
//! println!("distortion reduced by {:.1} dB", result.distortion_reduction_db());
//! ```

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod mnist;
pub mod nn;
pub mod regularize;
pub mod report;
pub mod rng;
pub mod signal;
pub mod trainer;

pub use error::{Error, Result};
pub use nn::{Activation, Gradients, Layout, NetworkParams};
pub use regularize::{Regime, RegimeKind, Workers};
pub use trainer::{ErrorCurve, RegimeKnobs, TrainConfig};
