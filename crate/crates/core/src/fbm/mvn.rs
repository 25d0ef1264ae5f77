//! Mandelbrot–van Ness representation and the locally independent split of
//! an fBm increment,
//!
//! ```text
//! β_{t+h} − β_t = α_H ∫_{−∞}^t [(t+h−u)^{H−½} − (t−u)^{H−½}] dW_u     (smooth part)
//!               + α_H ∫_t^{t+h} (t+h−u)^{H−½} dW_u                     (rough part)
//! ```
//!
//! The two-sided white noise is discretised on cells: a uniform window of
//! width `fine_step` on `(t, t+h_max]` and a history grid on `[−T_hist, t]`
//! graded geometrically toward `u = t`. Each stochastic integral becomes
//! `Σ_j (∫_{cell j} K) · ΔW_j / |cell j|`, the conditional expectation of the
//! exact integral given the cell increments. Kernel cell integrals are
//! evaluated in closed form near the singular point and by three-point
//! Gauss–Legendre on a cancellation-free kernel further away.

use super::fgn::check_hurst;
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::rng;

/// Normalisation `α_H` with `Var β_1 = 1`, by numerical quadrature of
/// `α_H^{−2} = ∫_0^∞ ((1+d)^{H−½} − d^{H−½})² dd + 1/(2H)`.
pub fn mvn_normalization(hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    let a = hurst - 0.5;
    if a == 0.0 {
        return Ok(1.0);
    }
    let near = tanh_sinh(|d: f64| ((1.0 + d).powf(a) - d.powf(a)).powi(2), 0.0, 1.0, 1e-13);
    // d = 1/s on [1, ∞)
    let far = tanh_sinh(
        |s: f64| {
            let k = (a * s.ln_1p()).exp_m1();
            s.powf(-2.0 * a - 2.0) * k * k
        },
        0.0,
        1.0,
        1e-13,
    );
    Ok(1.0 / (near + far + 1.0 / (2.0 * hurst)).sqrt())
}

/// Discretisation parameters for [`MvnNoise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnConfig {
    /// Width of the uniform window cells on `(t, t+h_max]`; every requested
    /// `h` must be a multiple of it.
    pub fine_step: f64,
    /// Width of the history cell adjacent to `u = t`, as a fraction of
    /// `fine_step`.
    pub first_cell_fraction: f64,
    /// Geometric growth of history cells away from `u = t`.
    pub growth: f64,
    /// Initial history horizon is `history_factor · (t + h_max)`.
    pub history_factor: f64,
    /// Horizon is doubled until the smooth-part variance at `h_max` changes
    /// by less than this relative amount.
    pub truncation_tol: f64,
}

impl MvnConfig {
    pub fn new(fine_step: f64) -> Self {
        Self {
            fine_step,
            first_cell_fraction: 1e-2,
            growth: 0.05,
            history_factor: 50.0,
            truncation_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    /// distances below the base time: the cell is `u ∈ [t − d1, t − d0]`
    d0: f64,
    d1: f64,
    dw: f64,
}

/// Sampled white noise on `[−T_hist, t + h_max]` for one scalar fBm.
#[derive(Debug, Clone)]
pub struct MvnNoise {
    hurst: f64,
    alpha_h: f64,
    base_time: f64,
    fine_step: f64,
    window: Vec<f64>,
    history: Vec<Cell>,
    history_horizon: f64,
}

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// `(d+h)^a − d^a` without cancellation for `d ≫ h`.
#[inline]
fn smooth_kernel(a: f64, d: f64, h: f64) -> f64 {
    d.powf(a) * (a * (h / d).ln_1p()).exp_m1()
}

/// `∫_{d0}^{d1} ((d+h)^a − d^a) dd`
fn smooth_cell(a: f64, d0: f64, d1: f64, h: f64) -> f64 {
    if d0 >= 4.0 * h {
        gl3(d0, d1, |d| smooth_kernel(a, d, h))
    } else {
        let p = |x: f64| x.powf(a + 1.0) / (a + 1.0);
        (p(d1 + h) - p(d0 + h)) - (p(d1) - p(d0))
    }
}

/// `∫_{d0}^{d1} (d+h)^{a−order} dd` times the derivative prefactor.
fn derivative_cell(a: f64, order: u8, d0: f64, d1: f64, h: f64) -> f64 {
    let hurst = a + 0.5;
    if d0 >= 4.0 * h {
        let pref = match order {
            1 => hurst - 0.5,
            _ => (hurst - 0.5) * (hurst - 1.5),
        };
        let e = a - order as f64;
        pref * gl3(d0, d1, |d| (d + h).powf(e))
    } else {
        // antiderivatives: (d+h)^a for order 1, a·(d+h)^{a−1} for order 2
        let e = a - order as f64 + 1.0;
        let c = if order == 1 { 1.0 } else { a };
        c * ((d1 + h).powf(e) - (d0 + h).powf(e))
    }
}

#[inline]
fn gl3(x0: f64, x1: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (x1 - x0);
    let mid = 0.5 * (x0 + x1);
    half * GL3_X
        .iter()
        .zip(GL3_W)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

impl MvnNoise {
    /// Samples the white noise needed to split increments of length up to
    /// `h_max` at `base_time`. Window cells are drawn first, then history
    /// cells outward from `u = t`, so enlarging the horizon keeps all earlier
    /// draws.
    pub fn sample(hurst: f64, base_time: f64, h_max: f64, cfg: &MvnConfig, seed: u64) -> Result<Self> {
        check_hurst(hurst)?;
        if !(cfg.fine_step > 0.0) {
            return Err(Error::param("fine_step", "must be positive"));
        }
        if base_time < 0.0 {
            return Err(Error::param("base_time", "must be nonnegative"));
        }
        if !(h_max > 0.0) {
            return Err(Error::param("h_max", "must be positive"));
        }
        if !(cfg.growth > 0.0 && cfg.first_cell_fraction > 0.0) {
            return Err(Error::param("growth", "history grading parameters must be positive"));
        }
        let alpha_h = mvn_normalization(hurst)?;
        let n_window = aligned_steps(h_max, cfg.fine_step)?;
        let horizon = history_horizon(hurst, base_time, h_max, cfg);
        let bounds = history_bounds(cfg, base_time + horizon);

        let mut r = rng::rng_from_seed(seed);
        let window = (0..n_window)
            .map(|_| cfg.fine_step.sqrt() * rng::standard_normal(&mut r))
            .collect();
        let history = bounds
            .windows(2)
            .map(|w| Cell {
                d0: w[0],
                d1: w[1],
                dw: (w[1] - w[0]).sqrt() * rng::standard_normal(&mut r),
            })
            .collect();
        Ok(Self {
            hurst,
            alpha_h,
            base_time,
            fine_step: cfg.fine_step,
            window,
            history,
            history_horizon: horizon,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn alpha_h(&self) -> f64 {
        self.alpha_h
    }

    pub fn base_time(&self) -> f64 {
        self.base_time
    }

    pub fn fine_step(&self) -> f64 {
        self.fine_step
    }

    /// History horizon `T_hist` (the noise starts at `u = −T_hist`).
    pub fn history_horizon(&self) -> f64 {
        self.history_horizon
    }

    pub fn window_steps(&self) -> usize {
        self.window.len()
    }

    pub fn history_cells(&self) -> usize {
        self.history.len()
    }

    fn a(&self) -> f64 {
        self.hurst - 0.5
    }

    fn check_h(&self, h: f64) -> Result<usize> {
        if !(h > 0.0) {
            return Err(Error::param("h", format!("must be positive, got {h}")));
        }
        let k = aligned_steps(h, self.fine_step)?;
        if k > self.window.len() {
            return Err(Error::param(
                "h",
                format!("{h} exceeds the sampled window of {} steps", self.window.len()),
            ));
        }
        Ok(k)
    }

    /// Smooth part `β̄^t_h`.
    pub fn smooth(&self, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::param("h", format!("must be positive, got {h}")));
        }
        let a = self.a();
        if a == 0.0 {
            return Ok(0.0);
        }
        let s: f64 = self
            .history
            .iter()
            .map(|c| smooth_cell(a, c.d0, c.d1, h) * c.dw / (c.d1 - c.d0))
            .sum();
        Ok(self.alpha_h * s)
    }

    /// Derivative of `h ↦ β̄^t_h` of order 1 or 2.
    pub fn smooth_derivative(&self, h: f64, order: u8) -> Result<f64> {
        if !(order == 1 || order == 2) {
            return Err(Error::param("order", format!("must be 1 or 2, got {order}")));
        }
        if !(h > 0.0) {
            return Err(Error::param("h", format!("must be positive, got {h}")));
        }
        let a = self.a();
        if a == 0.0 {
            return Ok(0.0);
        }
        let s: f64 = self
            .history
            .iter()
            .map(|c| derivative_cell(a, order, c.d0, c.d1, h) * c.dw / (c.d1 - c.d0))
            .sum();
        Ok(self.alpha_h * s)
    }

    /// Rough part `β̃^t_h`; `h` must be a multiple of `fine_step`.
    pub fn rough(&self, h: f64) -> Result<f64> {
        let k = self.check_h(h)?;
        Ok(self.rough_steps(k))
    }

    /// Rough part at `h = k·fine_step`.
    pub fn rough_steps(&self, k: usize) -> f64 {
        let a = self.a();
        let dt = self.fine_step;
        let p = |x: f64| x.max(0.0).powf(a + 1.0) / (a + 1.0);
        let s: f64 = self.window[..k]
            .iter()
            .enumerate()
            .map(|(j, dw)| {
                // cell u ∈ [t + j·dt, t + (j+1)·dt], kernel (t + k·dt − u)^a
                let far = (k - j) as f64 * dt;
                let near = (k - j - 1) as f64 * dt;
                (p(far) - p(near)) / dt * dw
            })
            .sum();
        self.alpha_h * s
    }

    /// Rough part at `h = k·fine_step` for `k = 0..=steps`: a discrete
    /// convolution of the window noise with precomputed cell weights.
    pub fn rough_path(&self, steps: usize) -> Result<Vec<f64>> {
        if steps > self.window.len() {
            return Err(Error::param("steps", "exceeds the sampled window"));
        }
        let a = self.a();
        let dt = self.fine_step;
        let p = |x: f64| x.powf(a + 1.0) / (a + 1.0);
        // weight of the cell m steps behind the evaluation point
        let weights: Vec<f64> = (0..steps)
            .map(|m| (p((m + 1) as f64 * dt) - p(m as f64 * dt)) / dt)
            .collect();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(0.0);
        for k in 1..=steps {
            let s: f64 = self.window[..k]
                .iter()
                .zip(weights[..k].iter().rev())
                .map(|(dw, w)| dw * w)
                .sum();
            out.push(self.alpha_h * s);
        }
        Ok(out)
    }

    /// `β_{t+h} − β_t` from the combined kernel
    /// `(t+h−u)_+^{H−½} − (t−u)_+^{H−½}` on every cell.
    pub fn increment(&self, h: f64) -> Result<f64> {
        let k = self.check_h(h)?;
        let a = self.a();
        let dt = self.fine_step;
        let hh = k as f64 * dt;
        let p = |x: f64| x.max(0.0).powf(a + 1.0) / (a + 1.0);
        let mut s = 0.0;
        for c in &self.history {
            let w = c.d1 - c.d0;
            let cell = if a == 0.0 { 0.0 } else { smooth_cell(a, c.d0, c.d1, hh) };
            s += cell * c.dw / w;
        }
        for (j, dw) in self.window[..k].iter().enumerate() {
            let u0 = j as f64 * dt;
            let u1 = u0 + dt;
            s += (p(hh - u0) - p(hh - u1)) / dt * dw;
        }
        Ok(self.alpha_h * s)
    }

    /// Deterministic variance of the discretised smooth part at `h`.
    pub fn smooth_variance(&self, h: f64) -> f64 {
        smooth_variance_on(self.a(), self.alpha_h, &self.history, h)
    }

    /// Increments `β_{t+k·fine_step} − β_t` for `k = 0..=steps`.
    pub fn increment_path(&self, steps: usize) -> Result<Vec<f64>> {
        if steps > self.window.len() {
            return Err(Error::param("steps", "exceeds the sampled window"));
        }
        let mut out = self.rough_path(steps)?;
        for (k, v) in out.iter_mut().enumerate().skip(1) {
            *v += self.smooth(k as f64 * self.fine_step)?;
        }
        Ok(out)
    }
}

fn aligned_steps(h: f64, step: f64) -> Result<usize> {
    let k = (h / step).round();
    if (k * step - h).abs() > 1e-9 * h.max(step) || k < 1.0 {
        return Err(Error::param(
            "h",
            format!("{h} is not a positive multiple of the window step {step}"),
        ));
    }
    Ok(k as usize)
}

fn history_bounds(cfg: &MvnConfig, total: f64) -> Vec<f64> {
    let mut d = vec![0.0];
    let mut next = cfg.fine_step * cfg.first_cell_fraction;
    while next < total {
        d.push(next);
        next *= 1.0 + cfg.growth;
    }
    d.push(total);
    d
}

fn smooth_variance_on(a: f64, alpha_h: f64, cells: &[Cell], h: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    alpha_h
        * alpha_h
        * cells
            .iter()
            .map(|c| {
                let v = smooth_cell(a, c.d0, c.d1, h);
                v * v / (c.d1 - c.d0)
            })
            .sum::<f64>()
}

fn history_horizon(hurst: f64, base_time: f64, h_max: f64, cfg: &MvnConfig) -> f64 {
    let a = hurst - 0.5;
    let mut horizon = cfg.history_factor * (base_time + h_max);
    if a == 0.0 {
        return horizon;
    }
    let variance = |total: f64| {
        let b = history_bounds(cfg, total);
        let cells: Vec<Cell> = b
            .windows(2)
            .map(|w| Cell {
                d0: w[0],
                d1: w[1],
                dw: 0.0,
            })
            .collect();
        smooth_variance_on(a, 1.0, &cells, h_max)
    };
    let mut v = variance(base_time + horizon);
    for _ in 0..80 {
        let v2 = variance(base_time + 2.0 * horizon);
        if (v2 - v).abs() < cfg.truncation_tol * v2 {
            break;
        }
        horizon *= 2.0;
        v = v2;
    }
    horizon
}

/// Smooth and rough parts of `β_{t+h} − β_t` on a set of `h` values.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementDecomposition {
    pub base_time: f64,
    pub h: Vec<f64>,
    pub smooth: Vec<f64>,
    pub rough: Vec<f64>,
}

impl IncrementDecomposition {
    pub fn reconstructed(&self) -> Vec<f64> {
        self.smooth.iter().zip(&self.rough).map(|(a, b)| a + b).collect()
    }
}

pub fn decompose_increment(noise: &MvnNoise, h_grid: &[f64]) -> Result<IncrementDecomposition> {
    let mut smooth = Vec::with_capacity(h_grid.len());
    let mut rough = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        smooth.push(noise.smooth(h)?);
        rough.push(noise.rough(h)?);
    }
    Ok(IncrementDecomposition {
        base_time: noise.base_time(),
        h: h_grid.to_vec(),
        smooth,
        rough,
    })
}

pub fn smooth_part_derivative(noise: &MvnNoise, h_grid: &[f64], order: u8) -> Result<Vec<f64>> {
    h_grid
        .iter()
        .map(|&h| noise.smooth_derivative(h, order))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_matches_gamma_closed_form() {
        // √(Γ(2H+1) sin(πH)) / Γ(H+½) at H = 0.75, evaluated offline
        assert!((mvn_normalization(0.75).unwrap() - 1.069_644_635_031_99).abs() < 1e-9);
        assert_eq!(mvn_normalization(0.5).unwrap(), 1.0);
    }

    #[test]
    fn discretised_increment_has_fbm_variance() {
        for hurst in [0.6, 0.75, 0.9] {
            let cfg = MvnConfig::new(1.0 / 64.0);
            let noise = MvnNoise::sample(hurst, 0.5, 1.0, &cfg, 1).unwrap();
            let a = hurst - 0.5;
            let p = |x: f64| x.powf(a + 1.0) / (a + 1.0);
            let rough_var: f64 = (0..64)
                .map(|j| {
                    let far = (64 - j) as f64 / 64.0;
                    let near = (63 - j) as f64 / 64.0;
                    let v = (p(far) - p(near)) * 64.0;
                    v * v / 64.0
                })
                .sum::<f64>()
                * noise.alpha_h().powi(2);
            let total = noise.smooth_variance(1.0) + rough_var;
            assert!((total - 1.0).abs() < 5e-3, "H={hurst}: {total}");
        }
    }

    #[test]
    fn brownian_case_has_no_smooth_part() {
        let noise = MvnNoise::sample(0.5, 1.0, 0.5, &MvnConfig::new(0.01), 4).unwrap();
        assert_eq!(noise.smooth(0.3).unwrap(), 0.0);
        assert_eq!(noise.smooth_derivative(0.3, 1).unwrap(), 0.0);
        // rough part is the plain Wiener increment
        let w: f64 = noise.window[..30].iter().sum();
        assert!((noise.rough(0.3).unwrap() - w).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_holds() {
        let noise = MvnNoise::sample(0.75, 0.25, 1.0, &MvnConfig::new(1.0 / 128.0), 9).unwrap();
        for k in [1usize, 5, 64, 128] {
            let h = k as f64 / 128.0;
            let split = noise.smooth(h).unwrap() + noise.rough(h).unwrap();
            assert!((split - noise.increment(h).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn rough_path_matches_pointwise_rough_part() {
        let noise = MvnNoise::sample(0.7, 0.1, 0.5, &MvnConfig::new(1.0 / 64.0), 4).unwrap();
        let path = noise.rough_path(32).unwrap();
        for (k, v) in path.iter().enumerate() {
            assert!((v - noise.rough_steps(k)).abs() < 1e-13);
        }
        assert!(noise.rough_path(33).is_err());
    }

    #[test]
    fn rejects_nonpositive_and_misaligned_h() {
        let noise = MvnNoise::sample(0.75, 0.0, 1.0, &MvnConfig::new(0.1), 2).unwrap();
        assert!(noise.smooth(0.0).is_err());
        assert!(noise.rough(-0.1).is_err());
        assert!(noise.rough(0.15).is_err());
        assert!(noise.rough(1.1).is_err());
        assert!(noise.smooth_derivative(0.5, 3).is_err());
    }

    #[test]
    fn derivative_matches_central_differences() {
        let noise = MvnNoise::sample(0.75, 1.0, 1.0, &MvnConfig::new(0.05), 21).unwrap();
        for h in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let e = 1e-5 * h;
            let fd = (noise.smooth(h + e).unwrap() - noise.smooth(h - e).unwrap()) / (2.0 * e);
            let d1 = noise.smooth_derivative(h, 1).unwrap();
            assert!((fd - d1).abs() <= 1e-3 * d1.abs().max(1e-3), "h={h}: {fd} vs {d1}");
            let fd2 = (noise.smooth_derivative(h + e, 1).unwrap()
                - noise.smooth_derivative(h - e, 1).unwrap())
                / (2.0 * e);
            let d2 = noise.smooth_derivative(h, 2).unwrap();
            assert!((fd2 - d2).abs() <= 1e-3 * d2.abs().max(1e-3), "h={h}: {fd2} vs {d2}");
        }
    }
}
