use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_k = k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive and finite, got {dt}")));
        }
        Ok(Self { dt, steps })
    }

    /// Grid over `[0, horizon]` with `steps` cells.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("steps", "must be at least 1"));
        }
        Self::new(horizon / steps as f64, steps)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points (`steps + 1`).
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Grid restricted to the first `steps` cells.
    pub fn truncated(&self, steps: usize) -> Self {
        Self {
            dt: self.dt,
            steps: steps.min(self.steps),
        }
    }

    /// Every `stride`-th point of this grid.
    pub fn coarsened(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps.is_multiple_of(stride) {
            return Err(Error::param(
                "stride",
                format!("{stride} does not divide {} steps", self.steps),
            ));
        }
        Self::new(self.dt * stride as f64, self.steps / stride)
    }
}
