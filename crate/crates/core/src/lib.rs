//! Single-photon Mach-Zehnder interference of quantum channels that share
//! one environment.
//!
//! The arms of the interferometer are built from birefringent crystals,
//! half-wave plates and raw unitaries. Each crystal entangles polarization
//! with a time bin (the o-ray is undelayed, the e-ray is delayed), so an arm
//! is a channel described by delay-tagged Kraus operators. Two arms that share
//! the time-bin environment interfere through every pair of Kraus operators
//! landing in the same bin, which produces visibilities that per-arm process
//! tomography cannot see.
//!
//! Module map:
//!
//! * [`linalg`]: dense complex matrices, density matrices, Kraus sets and the
//!   elementary optical unitaries.
//! * [`optics`]: delay-tagged Kraus operators and unitary dilations of arms.
//! * [`interferometer`]: interference contrast, fringe probabilities and the
//!   brute-force dilation oracle.
//! * [`tomography`]: linear-inversion process tomography and the blindness
//!   demonstration.
//! * [`experiments`]: the four reference configurations, sweeps, Poisson
//!   count simulation, fringe fitting and the QKD reduction.

pub mod error;
pub mod experiments;
pub mod interferometer;
pub mod linalg;
pub mod optics;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64;
