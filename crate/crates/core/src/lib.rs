//! Spectral-Galerkin simulation of semilinear evolution equations driven by
//! trace-class fractional Brownian motion with Hurst parameter `H > 1/2`.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: the diagonal generator `A`, its semigroup `S_t` and the
//!   interpolation norms `‖·‖_{H_κ}`.
//! - [`fbm`]: exact fractional Gaussian noise samplers, trace-class Q-fBm and
//!   the Mandelbrot–van Ness smooth/rough increment split.
//! - [`holder`]: Hölder, mild Hölder, negative Hölder and `B̂_{α,p}` estimators
//!   plus log–log rate fitting.
//! - [`sewing`]: dyadic mild sewing with per-level telemetry and the Young,
//!   mild Young and mixed Wiener–Young integrals built on it.
//! - [`coefficients`]: bump-truncated Nemytskii drift/diffusion pairs and
//!   their averages against a stationary law.
//! - [`solver`]: exponential left-point scheme for mild solutions, the Picard
//!   map and the residue comparison.
//! - [`slowfast`]: fast environments, ergodic deviation, the averaging
//!   experiment and the Wiener counterexample.
//! - [`experiment`]: config-driven runners and CSV reports used by the
//!   `mildsew` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod coefficients;
pub mod error;
pub mod experiment;
pub mod fbm;
pub mod grid;
pub mod holder;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod sewing;
pub mod slowfast;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use spectral::{DiagonalGenerator, Identity, Propagator, SpectralOperator, SpectralVector};
