//! Bandlimited interpolation of graph signals (BIG) for semi-supervised
//! learning on point clouds.
//!
//! The crate is organised bottom-up:
//!
//! - [`density`]: isotropic Gaussian mixtures, sampling, hyperplane
//!   boundaries and the boundary integrals/suprema used by the limits.
//! - [`graph`]: the Gaussian-kernel similarity graph and its Laplacian
//!   `L = (D - W) / n`.
//! - [`spectral`]: graph Fourier basis, bandwidth estimates, Paley-Wiener
//!   projections and the cutoff frequency of a labeled set.
//! - [`ssl`]: least-squares and minimum-bandwidth interpolation, plus the
//!   harmonic (Laplacian-regularized) baseline.
//! - [`asymptotics`]: closed-form large-sample limits, tail bounds and
//!   parameter schedules.
//! - [`harness`]: seeded Monte-Carlo experiments, CSV and SVG output.

pub mod asymptotics;
pub mod density;
pub mod error;
pub mod graph;
pub mod harness;
pub mod spectral;
pub mod ssl;

pub use error::{Error, Result};
