//! Simulation and analysis toolkit for narrowband polarization-entangled
//! photon-pair experiments: two-path parametric polarization states, photon
//! time-tag synthesis, correlation and visibility analysis, interferometer
//! phase locking, and maximum-likelihood state tomography.
//!
//! The math layers are generic over the floating-point scalar (see
//! [`scalar::Real`]); `f64` aliases for the domain types live at the crate
//! root.

// indexed loops read naturally in small fixed-size matrix code
#![allow(clippy::needless_range_loop)]

pub mod coincidence;
pub mod error;
pub mod fft;
pub mod fit;
pub mod io;
pub mod linalg;
pub mod optics;
pub mod optimize;
pub mod phaselock;
pub mod presets;
pub mod quantum;
pub mod scalar;
pub mod spectrum;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::{Real, C};

/// `f64` instantiations of the core domain types.
pub type PolarizationVector64 = quantum::PolarizationVector<f64>;
pub type TwoQubitState64 = quantum::TwoQubitState<f64>;
pub type DensityMatrix64 = quantum::DensityMatrix<f64>;
pub type PairState64 = quantum::PairState<f64>;
