//! Fractional Brownian motion: scalar fGn/fBm samplers, trace-class Q-fBm in
//! a truncated eigenbasis, and the Mandelbrot–van Ness increment split.

mod fgn;
mod mvn;
mod qfbm;

pub use fgn::{
    fbm_covariance, fgn_autocovariance, sample_fbm, sample_fgn, FgnMethod, FgnSample, FgnSampler,
};
pub use mvn::{
    decompose_increment, mvn_normalization, smooth_part_derivative, IncrementDecomposition,
    MvnConfig, MvnNoise,
};
pub use qfbm::{sample_qfbm, QSpec, QSpecConfig, QfbmSampler};
