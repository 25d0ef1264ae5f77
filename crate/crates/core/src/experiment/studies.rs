//! Measurement routines behind the experiment runners.
//!
//! Each study returns plain numbers plus the rows of its CSV artifact, so the
//! same code backs the `mildsew` subcommands, the examples and the test
//! suites.

use rayon::prelude::*;

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, sample_fbm, FgnSampler, MvnConfig, MvnNoise, QSpec, QfbmSampler};
use crate::grid::TimeGrid;
use crate::holder::{fit_rate, mild_holder_norm, RateFit};
use crate::path::{OperatorPath, QfbmPath, SampledPath};
use crate::rng::{self, derive_seed, stream};
use crate::sewing::{
    driver_from_noise, mild_young_integral, mixed_wiener_young_integral, sew, young_integral_with, Germ, MildYoungGerm,
    SewingResult, YoungScheme,
};
use crate::solver::{solve_mild, SolveConfig};
use crate::spectral::{l2_norm, DiagonalGenerator, SpectralOperator, SpectralVector};

/// One cell of the covariance table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceRow {
    pub s: f64,
    pub t: f64,
    pub empirical: f64,
    pub exact: f64,
    pub stderr: f64,
}

impl CovarianceRow {
    pub fn abs_error(&self) -> f64 {
        (self.empirical - self.exact).abs()
    }
}

#[derive(Debug, Clone)]
pub struct CovarianceStudy {
    pub hurst: f64,
    pub rows: Vec<CovarianceRow>,
    pub max_abs_error: f64,
    pub max_stderr: f64,
}

/// Empirical `E[β_s β_t]` over `replicas` exact paths on `steps` cells of
/// `[0, horizon]`, on a `subgrid × subgrid` lattice of time pairs.
pub fn fbm_covariance_study(
    hurst: f64,
    horizon: f64,
    steps: usize,
    subgrid: usize,
    replicas: usize,
    seed: u64,
) -> Result<CovarianceStudy> {
    if subgrid == 0 || !steps.is_multiple_of(subgrid) {
        return Err(Error::param("subgrid", "must divide the number of steps"));
    }
    if replicas < 2 {
        return Err(Error::param("replicas", "need at least two replicas"));
    }
    let grid = TimeGrid::uniform(horizon, steps)?;
    let sampler = FgnSampler::new(hurst, steps, grid.dt())?;
    let idx: Vec<usize> = (1..=subgrid).map(|i| i * steps / subgrid).collect();
    let m = idx.len();
    // per-chunk sums of x_i x_j and (x_i x_j)², reduced in chunk order
    let chunk = 256;
    let n_chunks = replicas.div_ceil(chunk);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut s1 = vec![0.0; m * m];
            let mut s2 = vec![0.0; m * m];
            for r in c * chunk..((c + 1) * chunk).min(replicas) {
                let mut g = rng::rng_from_seed(derive_seed(seed, r as u64));
                let path = sampler.sample_path(&mut g);
                let x: Vec<f64> = idx.iter().map(|&k| path[k]).collect();
                for i in 0..m {
                    for j in 0..m {
                        let p = x[i] * x[j];
                        s1[i * m + j] += p;
                        s2[i * m + j] += p * p;
                    }
                }
            }
            (s1, s2)
        })
        .collect();
    let mut s1 = vec![0.0; m * m];
    let mut s2 = vec![0.0; m * m];
    for (a, b) in partial {
        for k in 0..m * m {
            s1[k] += a[k];
            s2[k] += b[k];
        }
    }
    let n = replicas as f64;
    let mut rows = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let (s, t) = (grid.time(idx[i]), grid.time(idx[j]));
            let mean = s1[i * m + j] / n;
            let var = (s2[i * m + j] / n - mean * mean).max(0.0) * n / (n - 1.0);
            rows.push(CovarianceRow {
                s,
                t,
                empirical: mean,
                exact: fbm_covariance(hurst, s, t)?,
                stderr: (var / n).sqrt(),
            });
        }
    }
    let max_abs_error = rows.iter().map(CovarianceRow::abs_error).fold(0.0, f64::max);
    let max_stderr = rows.iter().map(|r| r.stderr).fold(0.0, f64::max);
    Ok(CovarianceStudy {
        hurst,
        rows,
        max_abs_error,
        max_stderr,
    })
}

#[derive(Debug, Clone)]
pub struct VariogramStudy {
    pub hurst: f64,
    pub lags: Vec<f64>,
    pub mean_sq: Vec<f64>,
    pub fit: RateFit,
}

/// `E|β_{t+ℓ} − β_t|²` against the lag `ℓ` (dyadic lags), averaged over all
/// start points and `replicas` paths; the fitted slope estimates `2H`.
pub fn variogram_study(hurst: f64, steps: usize, replicas: usize, seed: u64) -> Result<VariogramStudy> {
    let grid = TimeGrid::uniform(1.0, steps)?;
    let lag_steps: Vec<usize> = (0..).map(|k| 1usize << k).take_while(|l| *l <= steps / 4).collect();
    if lag_steps.len() < 3 {
        return Err(Error::NotEnoughPoints {
            needed: 3,
            got: lag_steps.len(),
        });
    }
    let per: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let p = sample_fbm(hurst, &grid, derive_seed(seed, r as u64))?;
            let v = p.values();
            Ok(lag_steps
                .iter()
                .map(|&l| (0..=steps - l).map(|k| (v[k + l] - v[k]).powi(2)).sum::<f64>() / (steps - l + 1) as f64)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mean_sq: Vec<f64> = (0..lag_steps.len())
        .map(|i| per.iter().map(|r| r[i]).sum::<f64>() / replicas as f64)
        .collect();
    let lags: Vec<f64> = lag_steps.iter().map(|l| *l as f64 * grid.dt()).collect();
    let fit = fit_rate(&lags, &mean_sq)?;
    Ok(VariogramStudy {
        hurst,
        lags,
        mean_sq,
        fit,
    })
}

#[derive(Debug, Clone)]
pub struct YoungStudy {
    /// `(h_T² − h_0²)/2`
    pub exact: f64,
    pub trapezoid: SewingResult,
    pub left_point: SewingResult,
    /// Largest deviation of the `f ≡ 1` integral from `h_T − h_0` over levels.
    pub constant_max_error: f64,
}

impl YoungStudy {
    pub fn trapezoid_rel_error(&self) -> f64 {
        ((self.trapezoid.value[0] - self.exact) / self.exact).abs()
    }

    pub fn left_point_rel_error(&self) -> f64 {
        ((self.left_point.value[0] - self.exact) / self.exact).abs()
    }
}

/// `∫ h dh` over one fBm path sewn through `levels` dyadic levels, plus the
/// `f ≡ 1` telescoping check at every level.
pub fn young_study(hurst: f64, levels: u32, seed: u64) -> Result<YoungStudy> {
    let steps = 1usize << levels;
    let grid = TimeGrid::uniform(1.0, steps)?;
    let h = sample_fbm(hurst, &grid, seed)?;
    let f = SampledPath::from_scalar(&h);
    let v = h.values();
    let exact = 0.5 * (v[steps] * v[steps] - v[0] * v[0]);
    let trapezoid = young_integral_with(&f, &h, 0, steps, levels, YoungScheme::Trapezoid)?;
    let left_point = young_integral_with(&f, &h, 0, steps, levels, YoungScheme::LeftPoint)?;
    let one = SampledPath::from_fn(grid, |_| SpectralVector::new(vec![1.0]))?;
    let mut constant_max_error: f64 = 0.0;
    for l in 1..=levels {
        let r = young_integral_with(&one, &h, 0, steps, l, YoungScheme::LeftPoint)?;
        constant_max_error = constant_max_error.max((r.value[0] - (v[steps] - v[0])).abs());
    }
    Ok(YoungStudy {
        exact,
        trapezoid,
        left_point,
        constant_max_error,
    })
}

#[derive(Debug, Clone)]
pub struct MildYoungRateStudy {
    /// Interval lengths `t − s`.
    pub sizes: Vec<f64>,
    /// Mean of `‖IΞ_{s,t} − Ξ_{s,t}‖` over disjoint intervals of each length.
    pub defects: Vec<f64>,
    pub fit: RateFit,
    /// Telemetry of the sewing on the longest interval.
    pub telemetry: SewingResult,
}

/// Remainder `‖IΞ_{s,t} − Ξ_{s,t}‖` of the mild Young germ
/// `Ξ_{s,t} = S_{t−s} f_s h_{s,t}` with `f`, `h` independent fBm paths, for
/// `t − s = 2^{−k}`, `k = 1..=sizes`, on a grid of `2^fine_log2` cells.
/// Each size is averaged over up to `max_windows` disjoint intervals and over
/// `replicas` independent path pairs.
#[allow(clippy::too_many_arguments)]
pub fn mild_young_rate_study(
    gen: &DiagonalGenerator,
    hurst_f: f64,
    hurst_h: f64,
    fine_log2: u32,
    sizes: u32,
    max_windows: usize,
    replicas: usize,
    seed: u64,
) -> Result<MildYoungRateStudy> {
    if sizes < 3 || sizes >= fine_log2 {
        return Err(Error::param("sizes", "need 3 <= sizes < fine_log2"));
    }
    if replicas == 0 {
        return Err(Error::param("replicas", "need at least one replica"));
    }
    let steps = 1usize << fine_log2;
    let grid = TimeGrid::uniform(1.0, steps)?;
    let n = gen.n_modes();
    let dir: SpectralVector = (0..n).map(|k| 0.5f64.powi(k as i32)).collect();
    let per: Vec<(Vec<f64>, SewingResult)> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, SewingResult)> {
            let rs = derive_seed(seed, r as u64);
            let f_scalar = sample_fbm(hurst_f, &grid, derive_seed(rs, stream::AUX))?;
            let h = QfbmPath::from(sample_fbm(hurst_h, &grid, derive_seed(rs, stream::DRIVER))?);
            let f = OperatorPath::new(
                grid,
                f_scalar
                    .values()
                    .iter()
                    .map(|v| SpectralOperator::rank_one(&(&dir * *v), &[1.0]))
                    .collect(),
            )?;
            let germ = MildYoungGerm::new(gen, &f, &h)?;
            let mut defects = Vec::with_capacity(sizes as usize);
            let mut telemetry = None;
            for k in 1..=sizes {
                let cells = steps >> k;
                let windows = (1usize << k).min(max_windows.max(1));
                let mut acc = 0.0;
                for w in 0..windows {
                    let s = w * cells;
                    let out = sew(gen, &germ, s, s + cells, fine_log2 - k)?;
                    acc += l2_norm(&(&out.value - &germ.eval(s, s + cells)));
                    if telemetry.is_none() {
                        telemetry = Some(out);
                    }
                }
                defects.push(acc / windows as f64);
            }
            Ok((defects, telemetry.expect("at least one size")))
        })
        .collect::<Result<_>>()?;
    let size_vals: Vec<f64> = (1..=sizes).map(|k| (steps >> k) as f64 * grid.dt()).collect();
    let defects: Vec<f64> = (0..sizes as usize)
        .map(|i| per.iter().map(|(d, _)| d[i]).sum::<f64>() / replicas as f64)
        .collect();
    let fit = fit_rate(&size_vals, &defects)?;
    Ok(MildYoungRateStudy {
        sizes: size_vals,
        defects,
        fit,
        telemetry: per.into_iter().next().expect("replicas > 0").1,
    })
}

#[derive(Debug, Clone)]
pub struct SewingDecayStudy {
    /// `L²` ensemble norm of the level-`n` Cauchy difference, `n = 1..=levels`.
    pub level_l2: Vec<f64>,
    pub replicas: usize,
}

impl SewingDecayStudy {
    /// `level_l2[n+1]/level_l2[n]`, indexed by `n = 1..levels`.
    pub fn ratios(&self) -> Vec<f64> {
        self.level_l2.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Mean of consecutive ratios `D_{n+1}/D_n` for `n` in `from..=to`.
    pub fn mean_ratio(&self, from: usize, to: usize) -> f64 {
        let r = self.ratios();
        let sel: Vec<f64> = (from..=to).filter_map(|n| r.get(n - 1).copied()).collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }
}

/// Dyadic Cauchy differences of the germ `S_{v−u} g(X_u)(B_v − B_u)` where
/// `X` solves the equation driven by the same Q-fBm `B`, in `L²` over
/// `replicas` drivers.
pub fn sewing_decay_study<C: Coefficients + ?Sized>(
    gen: &DiagonalGenerator,
    coeffs: &C,
    q: &QSpec,
    hurst: f64,
    levels: u32,
    replicas: usize,
    seed: u64,
) -> Result<SewingDecayStudy> {
    let steps = 1usize << levels;
    let grid = TimeGrid::uniform(1.0, steps)?;
    let sampler = QfbmSampler::new(q.clone(), hurst, grid)?;
    let cfg = SolveConfig::new(default_x0(gen.n_modes()));
    let per: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let h = sampler.sample(derive_seed(derive_seed(seed, stream::DRIVER), r as u64));
            let x = solve_mild(gen, coeffs, &h, &cfg)?.path;
            let g = OperatorPath::new(
                grid,
                x.values()
                    .iter()
                    .enumerate()
                    .map(|(k, xk)| coeffs.eval(grid.time(k), xk).1)
                    .collect(),
            )?;
            Ok(mild_young_integral(gen, &g, &h, 0, steps, levels)?.level_diffs)
        })
        .collect::<Result<_>>()?;
    let level_l2 = (0..levels as usize)
        .map(|i| (per.iter().map(|d| d[i] * d[i]).sum::<f64>() / replicas as f64).sqrt())
        .collect();
    Ok(SewingDecayStudy { level_l2, replicas })
}

/// Young (sewn) and mixed Wiener–Young values of one window integral.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedComparison {
    pub young: SpectralVector,
    pub mixed: SpectralVector,
}

impl MixedComparison {
    pub fn rel_error(&self) -> f64 {
        l2_norm(&(&self.young - &self.mixed)) / self.young.norm().max(f64::MIN_POSITIVE)
    }
}

/// `∫_s^{s+T} S_{s+T−r} g(r) dB_r` for a smooth-in-time `g`, computed once by
/// mild Young sewing of the driver reconstructed from the Mandelbrot–van
/// Ness noise and once by the mixed integral, on `drivers` independent
/// noises.
pub fn mixed_vs_young_study(
    gen: &DiagonalGenerator,
    q: &QSpec,
    hurst: f64,
    base_time: f64,
    levels: u32,
    drivers: usize,
    seed: u64,
) -> Result<Vec<MixedComparison>> {
    let steps = 1usize << levels;
    let dt = 1.0 / steps as f64;
    let grid = TimeGrid::new(dt, steps)?;
    let n = gen.n_modes();
    let m = q.m_modes();
    let g = OperatorPath::new(
        grid,
        grid.times()
            .iter()
            .map(|t| {
                let cols: Vec<SpectralVector> = (0..m)
                    .map(|j| (0..n).map(|k| (1.0 + t * (j + 1) as f64).cos() * 0.5f64.powi((k + j) as i32)).collect())
                    .collect();
                SpectralOperator::from_columns(&cols)
            })
            .collect::<Result<_>>()?,
    )?;
    let cfg = MvnConfig::new(dt);
    (0..drivers)
        .into_par_iter()
        .map(|d| {
            let dseed = derive_seed(derive_seed(seed, stream::HISTORY), d as u64);
            let noises: Vec<MvnNoise> = (0..m)
                .map(|j| MvnNoise::sample(hurst, base_time, 1.0, &cfg, derive_seed(dseed, j as u64)))
                .collect::<Result<_>>()?;
            let b = driver_from_noise(&noises, q, steps)?;
            let young = mild_young_integral(gen, &g, &b, 0, steps, levels)?.value;
            let mixed = mixed_wiener_young_integral(gen, &g, &noises, q)?.value;
            Ok(MixedComparison { young, mixed })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriRow {
    pub scale: f64,
    pub driver_norm: f64,
    pub solution_norm: f64,
}

#[derive(Debug, Clone)]
pub struct AprioriStudy {
    pub rows: Vec<AprioriRow>,
    /// `log(1 + ‖x‖)` against `log(1 + c‖h‖)`.
    pub fit: RateFit,
}

/// Solves with the driver scaled by each `c` and records
/// `‖x‖_{Ĉ^γ} = sup‖x‖ + mild Hölder seminorm` against `c·‖h‖_{C^γ}`.
pub fn apriori_study<C: Coefficients + ?Sized>(
    gen: &DiagonalGenerator,
    coeffs: &C,
    q: &QSpec,
    hurst: f64,
    steps: usize,
    scales: &[f64],
    gamma: f64,
    seed: u64,
) -> Result<AprioriStudy> {
    let grid = TimeGrid::uniform(1.0, steps)?;
    let h = QfbmSampler::new(q.clone(), hurst, grid)?.sample(derive_seed(seed, stream::DRIVER));
    let h_state = SampledPath::new(grid, h.values().iter().map(|v| SpectralVector::new(v.clone())).collect())?;
    let h_norm = crate::holder::holder_norm(&h_state, gamma)? + h_state.sup_norm();
    let cfg = SolveConfig::new(default_x0(gen.n_modes()));
    let rows: Vec<AprioriRow> = scales
        .iter()
        .map(|&c| {
            let x = solve_mild(gen, coeffs, &h.scaled(c), &cfg)?.path;
            Ok(AprioriRow {
                scale: c,
                driver_norm: c * h_norm,
                solution_norm: x.sup_norm() + mild_holder_norm(gen, &x, gamma)?,
            })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 + r.driver_norm).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (1.0 + r.solution_norm).ln()).collect();
    let fit = crate::holder::fit_linear(&xs, &ys)?;
    Ok(AprioriStudy { rows, fit })
}

/// Default initial state `x0_k = 2^{−k}` used by the studies.
pub fn default_x0(n_modes: usize) -> SpectralVector {
    (0..n_modes).map(|k| 0.5f64.powi(k as i32)).collect()
}
