use serde::{Deserialize, Serialize};

use super::fgn::{check_hurst, FgnSampler};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::QfbmPath;
use crate::rng;

/// Eigenvalues `λ_n` of a trace-class covariance `Q` on the noise space.
#[derive(Debug, Clone, PartialEq)]
pub struct QSpec {
    lambda: Vec<f64>,
}

/// Config form: `{q_exponent, m_modes}` or `{lambda = [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpecConfig {
    PowerLaw { q_exponent: f64, m_modes: usize },
    Explicit { lambda: Vec<f64> },
}

impl Default for QSpecConfig {
    fn default() -> Self {
        QSpecConfig::PowerLaw {
            q_exponent: 1.5,
            m_modes: 8,
        }
    }
}

impl QSpec {
    /// `λ_n = (n+1)^{−q}`, `n = 0..m`.
    pub fn power_law(q_exponent: f64, m_modes: usize) -> Result<Self> {
        if m_modes == 0 {
            return Err(Error::param("m_modes", "must be at least 1"));
        }
        if !(q_exponent > 0.0) {
            return Err(Error::param("q_exponent", "must be positive"));
        }
        Self::explicit((0..m_modes).map(|n| ((n + 1) as f64).powf(-q_exponent)).collect())
    }

    pub fn explicit(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Empty("covariance eigenvalue list"));
        }
        if lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::param("lambda", "eigenvalues must be positive and finite"));
        }
        if lambda.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("lambda", "eigenvalues must be sorted descending"));
        }
        Ok(Self { lambda })
    }

    pub fn from_config(cfg: &QSpecConfig) -> Result<Self> {
        match cfg {
            QSpecConfig::PowerLaw {
                q_exponent,
                m_modes,
            } => Self::power_law(*q_exponent, *m_modes),
            QSpecConfig::Explicit { lambda } => Self::explicit(lambda.clone()),
        }
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn m_modes(&self) -> usize {
        self.lambda.len()
    }

    pub fn trace(&self) -> f64 {
        self.lambda.iter().sum()
    }
}

/// Reusable sampler of `B_t = Σ_n √λ_n β^n_t e_n` on a fixed grid.
#[derive(Debug, Clone)]
pub struct QfbmSampler {
    q: QSpec,
    grid: TimeGrid,
    fgn: FgnSampler,
}

impl QfbmSampler {
    pub fn new(q: QSpec, hurst: f64, grid: TimeGrid) -> Result<Self> {
        check_hurst(hurst)?;
        let fgn = FgnSampler::new(hurst, grid.steps(), grid.dt())?;
        Ok(Self { q, grid, fgn })
    }

    pub fn q(&self) -> &QSpec {
        &self.q
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.fgn.hurst()
    }

    /// Mode `n` uses the seed `derive_seed(seed, n)`, so the first modes do
    /// not change when the truncation level grows.
    pub fn sample(&self, seed: u64) -> QfbmPath {
        let m = self.q.m_modes();
        let mut values = vec![vec![0.0; m]; self.grid.len()];
        for (n, lam) in self.q.lambda().iter().enumerate() {
            let mut r = rng::rng_from_seed(rng::derive_seed(seed, n as u64));
            let path = self.fgn.sample_path(&mut r);
            let scale = lam.sqrt();
            for (row, b) in values.iter_mut().zip(path) {
                row[n] = scale * b;
            }
        }
        QfbmPath::new(self.grid, values).expect("grid and path lengths agree")
    }
}

pub fn sample_qfbm(q: &QSpec, hurst: f64, grid: &TimeGrid, seed: u64) -> Result<QfbmPath> {
    Ok(QfbmSampler::new(q.clone(), hurst, *grid)?.sample(seed))
}
