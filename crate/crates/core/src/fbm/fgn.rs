//! Exact samplers for one-dimensional fractional Gaussian noise.
//!
//! The default sampler is the circulant embedding of the fGn autocovariance
//! (exact in distribution, `O(n log n)` per path). The Cholesky factor of the
//! full Toeplitz covariance is kept as the reference sampler and as the
//! fallback when the embedding is not nonnegative definite.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::ScalarPath;
use crate::rng::{self, SimRng};

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::param("hurst", format!("must lie in (0, 1), got {hurst}")));
    }
    Ok(())
}

/// `E[β_s β_t] = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if s < 0.0 || t < 0.0 {
        return Err(Error::param("s,t", "times must be nonnegative"));
    }
    let h2 = 2.0 * hurst;
    Ok(0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2)))
}

/// Autocovariance of fGn increments with step `dt` at integer `lag`.
pub fn fgn_autocovariance(hurst: f64, dt: f64, lag: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = lag as f64;
    let core = if lag == 0 {
        1.0
    } else {
        0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).powf(h2))
    };
    dt.powf(h2) * core
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgnMethod {
    CirculantEmbedding,
    Cholesky,
    /// The circulant embedding had a negative eigenvalue beyond tolerance.
    CholeskyFallback,
}

#[derive(Clone)]
enum Backend {
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky {
        lower: Vec<f64>,
    },
}

/// Reusable fGn sampler for fixed `(H, n, dt)`.
#[derive(Clone)]
pub struct FgnSampler {
    hurst: f64,
    n: usize,
    dt: f64,
    method: FgnMethod,
    backend: Backend,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnSampler")
            .field("hurst", &self.hurst)
            .field("n", &self.n)
            .field("dt", &self.dt)
            .field("method", &self.method)
            .finish()
    }
}

const NEG_EIG_TOL: f64 = 1e-10;

impl FgnSampler {
    pub fn new(hurst: f64, n: usize, dt: f64) -> Result<Self> {
        check_hurst(hurst)?;
        check_size(n, dt)?;
        let m = 2 * n;
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        c[0].re = fgn_autocovariance(hurst, dt, 0);
        for j in 1..n {
            let g = fgn_autocovariance(hurst, dt, j);
            c[j].re = g;
            c[m - j].re = g;
        }
        c[n].re = fgn_autocovariance(hurst, dt, n);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut c);
        let max = c.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        let min = c.iter().map(|z| z.re).fold(f64::MAX, f64::min);
        if min < -NEG_EIG_TOL * max {
            let mut s = Self::cholesky(hurst, n, dt)?;
            s.method = FgnMethod::CholeskyFallback;
            return Ok(s);
        }
        let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(Self {
            hurst,
            n,
            dt,
            method: FgnMethod::CirculantEmbedding,
            backend: Backend::Circulant { sqrt_eig, fft },
        })
    }

    /// Reference sampler through the Cholesky factor of the exact covariance.
    pub fn cholesky(hurst: f64, n: usize, dt: f64) -> Result<Self> {
        check_hurst(hurst)?;
        check_size(n, dt)?;
        let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(hurst, dt, k)).collect();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = gamma[i - j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::param(
                            "covariance",
                            format!("fGn covariance not positive definite at row {i}"),
                        ));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self {
            hurst,
            n,
            dt,
            method: FgnMethod::Cholesky,
            backend: Backend::Cholesky { lower: l },
        })
    }

    pub fn method(&self) -> FgnMethod {
        self.method
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `n` fGn increments.
    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        match &self.backend {
            Backend::Circulant { sqrt_eig, fft } => {
                let mut buf: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re = rng::standard_normal(rng);
                        let im = rng::standard_normal(rng);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.truncate(self.n);
                buf.into_iter().map(|z| z.re).collect()
            }
            Backend::Cholesky { lower } => {
                let z = rng::standard_normals(rng, self.n);
                (0..self.n)
                    .map(|i| {
                        lower[i * self.n..i * self.n + i + 1]
                            .iter()
                            .zip(&z)
                            .map(|(a, b)| a * b)
                            .sum()
                    })
                    .collect()
            }
        }
    }

    /// fBm values `β_{k·dt}`, `k = 0..=n`, starting at zero.
    pub fn sample_path(&self, rng: &mut SimRng) -> Vec<f64> {
        let inc = self.sample(rng);
        let mut path = Vec::with_capacity(self.n + 1);
        let mut acc = 0.0;
        path.push(0.0);
        for d in inc {
            acc += d;
            path.push(acc);
        }
        path
    }
}

fn check_size(n: usize, dt: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "need at least one increment"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// Result of [`sample_fgn`], carrying which sampler produced it.
#[derive(Debug, Clone)]
pub struct FgnSample {
    pub increments: Vec<f64>,
    pub method: FgnMethod,
}

pub fn sample_fgn(hurst: f64, n: usize, dt: f64, seed: u64) -> Result<FgnSample> {
    let sampler = FgnSampler::new(hurst, n, dt)?;
    let mut rng = rng::rng_from_seed(seed);
    Ok(FgnSample {
        increments: sampler.sample(&mut rng),
        method: sampler.method(),
    })
}

/// Scalar fBm path on `grid`, `β_0 = 0`.
pub fn sample_fbm(hurst: f64, grid: &TimeGrid, seed: u64) -> Result<ScalarPath> {
    let sampler = FgnSampler::new(hurst, grid.steps(), grid.dt())?;
    let mut rng = rng::rng_from_seed(seed);
    ScalarPath::new(*grid, sampler.sample_path(&mut rng))
}
