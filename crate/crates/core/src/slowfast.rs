//! Fast environments, ergodic deviation estimates, the slow-fast averaging
//! experiment and the Wiener counterexample.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{average_coefficient, average_modulation, CoefficientPair, Coefficients, Modulation, StationaryLaw};
use crate::error::{Error, Result};
use crate::fbm::{FgnSampler, QSpec, QSpecConfig, QfbmSampler};
use crate::grid::TimeGrid;
use crate::holder::{fit_rate, lp_mean, median, mild_holder_norm, neg_holder_norm_scalar_primitive, quantile, RateFit};
use crate::path::ScalarPath;
use crate::quadrature::GaussLegendre;
use crate::rng::{self, derive_seed, stream};
use crate::solver::{solve_mild, SolveConfig};
use crate::spectral::{SpectralOperator, SpectralVector};

/// Longest accepted fast step, as a fraction of the unit OU relaxation time.
pub const MAX_FINE_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FastKind {
    /// `dY = −Y dt + √2 dW`, `π = N(0,1)`.
    Ou,
    /// `dY = b(Y) dt + σ dB̂` with `b(y) = −κy + (κ+λ)·y(1 − y²/R²)` for
    /// `|y| ≤ R` and `−κy` beyond; `λ = −κ` gives the linear drift `−κy`.
    FracOu {
        hurst: f64,
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default = "half")]
        lambda: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// OU read at the clock `t^θ`, `θ < 1`: polynomial decay of the
    /// transition law towards `π`.
    SlowedOu { theta: f64 },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InitialLaw {
    /// Stationary start (OU kinds); the fractional kind burns in instead.
    #[default]
    Stationary,
    Fixed { y0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastSpec {
    #[serde(flatten)]
    pub kind: FastKind,
    #[serde(default = "default_fine_step")]
    pub fine_step: f64,
    #[serde(default)]
    pub y0: InitialLaw,
    /// Burn-in of the fractional kind, in relaxation times `1/κ`.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
}

fn default_fine_step() -> f64 {
    0.01
}

fn default_burn_in() -> f64 {
    20.0
}

impl FastSpec {
    pub fn ou(fine_step: f64) -> Self {
        Self {
            kind: FastKind::Ou,
            fine_step,
            y0: InitialLaw::Stationary,
            burn_in: default_burn_in(),
        }
    }

    pub fn frac_ou(hurst: f64, kappa: f64, lambda: f64, radius: f64, sigma: f64, fine_step: f64) -> Self {
        Self {
            kind: FastKind::FracOu {
                hurst,
                kappa,
                lambda,
                radius,
                sigma,
            },
            fine_step,
            y0: InitialLaw::Fixed { y0: 0.0 },
            burn_in: default_burn_in(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.fine_step > 0.0) {
            return Err(Error::param("fine_step", "must be positive"));
        }
        let relax = match &self.kind {
            FastKind::FracOu { kappa, hurst, .. } => {
                if !(*kappa > 0.0) {
                    return Err(Error::param("kappa", "must be positive"));
                }
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(Error::param("hurst", "must lie in (0, 1)"));
                }
                1.0 / kappa
            }
            FastKind::SlowedOu { theta } => {
                if !(*theta > 0.0 && *theta <= 1.0) {
                    return Err(Error::param("theta", "must lie in (0, 1]"));
                }
                1.0
            }
            FastKind::Ou => 1.0,
        };
        if self.fine_step > MAX_FINE_STEP * relax {
            return Err(Error::param(
                "fine_step",
                format!("{} exceeds {} of the relaxation time {relax}", self.fine_step, MAX_FINE_STEP),
            ));
        }
        Ok(())
    }

    /// Stationary law when it is Gaussian and known in closed form.
    pub fn gaussian_law(&self) -> Option<StationaryLaw> {
        match self.kind {
            FastKind::Ou | FastKind::SlowedOu { .. } => Some(StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 }),
            FastKind::FracOu {
                hurst,
                kappa,
                lambda,
                sigma,
                ..
            } if lambda == -kappa => Some(StationaryLaw::Gaussian {
                mean: 0.0,
                sd: frac_ou_stationary_variance(hurst, kappa, sigma).sqrt(),
            }),
            _ => None,
        }
    }
}

/// Drift of the fractional fast process.
pub fn frac_ou_drift(y: f64, kappa: f64, lambda: f64, radius: f64) -> f64 {
    if y.abs() <= radius {
        -kappa * y + (kappa + lambda) * y * (1.0 - y * y / (radius * radius))
    } else {
        -kappa * y
    }
}

/// `H Γ(2H) σ² κ^{−2H}`, the stationary variance of `dY = −κY dt + σ dB^H`.
pub fn frac_ou_stationary_variance(hurst: f64, kappa: f64, sigma: f64) -> f64 {
    hurst * gamma(2.0 * hurst) * sigma * sigma * kappa.powf(-2.0 * hurst)
}

// Lanczos approximation, g = 7, n = 9.
fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let a = G[1..]
        .iter()
        .enumerate()
        .fold(G[0], |acc, (i, g)| acc + g / (x + i as f64 + 1.0));
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Fast path on `[0, horizon]` with step `fine_step`.
pub fn sample_fast_path(spec: &FastSpec, horizon: f64, seed: u64) -> Result<ScalarPath> {
    spec.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::param("horizon", "must be positive"));
    }
    let steps = (horizon / spec.fine_step - 1e-9).ceil() as usize;
    let grid = TimeGrid::new(spec.fine_step, steps.max(1))?;
    let mut r = rng::rng_from_seed(seed);
    let start = |r: &mut rng::SimRng| match spec.y0 {
        InitialLaw::Stationary => rng::standard_normal(r),
        InitialLaw::Fixed { y0 } => y0,
    };
    let values = match &spec.kind {
        FastKind::Ou => {
            let a = (-spec.fine_step).exp();
            let b = (1.0 - a * a).sqrt();
            let mut y = start(&mut r);
            let mut v = Vec::with_capacity(grid.len());
            v.push(y);
            for _ in 0..grid.steps() {
                y = a * y + b * rng::standard_normal(&mut r);
                v.push(y);
            }
            v
        }
        FastKind::SlowedOu { theta } => {
            let mut y = start(&mut r);
            let mut v = Vec::with_capacity(grid.len());
            v.push(y);
            let mut clock = 0.0;
            for k in 1..grid.len() {
                let next = grid.time(k).powf(*theta);
                let a = (-(next - clock)).exp();
                y = a * y + (1.0 - a * a).sqrt() * rng::standard_normal(&mut r);
                v.push(y);
                clock = next;
            }
            v
        }
        FastKind::FracOu {
            hurst,
            kappa,
            lambda,
            radius,
            sigma,
        } => {
            let burn = (spec.burn_in / kappa / spec.fine_step).ceil() as usize;
            let total = burn + grid.steps();
            let fgn = FgnSampler::new(*hurst, total, spec.fine_step)?.sample(&mut r);
            let mut y = start(&mut r);
            let mut v = Vec::with_capacity(grid.len());
            if burn == 0 {
                v.push(y);
            }
            for (k, db) in fgn.iter().enumerate() {
                y += frac_ou_drift(y, *kappa, *lambda, *radius) * spec.fine_step + sigma * db;
                if k + 1 >= burn {
                    v.push(y);
                }
            }
            v
        }
    };
    ScalarPath::new(grid, values)
}

/// Total variation distance between `N(m e^{−τ}, 1 − e^{−2τ})` and
/// `N(0, 1)` by Gauss–Legendre quadrature of the density difference, split
/// at the density crossing points.
pub fn tv_to_stationary_ou(state: f64, elapsed: f64) -> Result<f64> {
    if !(elapsed >= 0.0) {
        return Err(Error::param("elapsed", "must be nonnegative"));
    }
    let var = -(-2.0 * elapsed).exp_m1();
    if var == 0.0 {
        return Ok(1.0);
    }
    let mean = state * (-elapsed).exp();
    let sd = var.sqrt();
    let p = |x: f64| (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    let q = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();

    let mut breaks: Vec<f64> = Vec::new();
    // p = q  ⇔  a x² + b x + c = 0
    let a = 0.5 - 0.5 / var;
    let b = mean / var;
    let c = -mean * mean / (2.0 * var) - 0.5 * var.ln();
    if a.abs() < 1e-15 {
        if b != 0.0 {
            breaks.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            breaks.push((-b - disc.sqrt()) / (2.0 * a));
            breaks.push((-b + disc.sqrt()) / (2.0 * a));
        }
    }
    for k in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0] {
        breaks.push(mean + k * sd);
        breaks.push(mean - k * sd);
        breaks.push(k);
        breaks.push(-k);
    }
    breaks.retain(|x| x.is_finite());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    let gl = GaussLegendre::new(24)?;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let pieces = 8;
        let h = (hi - lo) / pieces as f64;
        for i in 0..pieces {
            let x0 = lo + i as f64 * h;
            total += gl.integrate(x0, x0 + h, |x| (p(x) - q(x)).abs());
        }
    }
    Ok((0.5 * total).clamp(0.0, 1.0))
}

/// Scalar functional `m(y) − E_π m` scaled by `‖g_base(x)‖` (or by a
/// difference quotient for the Lipschitz variant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicFunctional {
    pub modulation: Modulation,
    pub mean: f64,
    pub scale: f64,
}

impl ErgodicFunctional {
    /// Bare modulation with unit scale.
    pub fn bare(modulation: Modulation, law: &StationaryLaw) -> Result<Self> {
        Ok(Self {
            modulation,
            mean: average_modulation(modulation, law, 32)?,
            scale: 1.0,
        })
    }

    /// `G_ε(t, x) − ḡ(x) = (m_g(Y_{t/ε}) − E m_g)·g_base(x)`.
    pub fn diffusion_at(pair: &CoefficientPair, law: &StationaryLaw, x: &[f64]) -> Result<Self> {
        Ok(Self {
            modulation: pair.m_g,
            mean: average_modulation(pair.m_g, law, 32)?,
            scale: pair.base_diffusion(x).frobenius_norm(),
        })
    }

    /// Lipschitz variant: `‖g_base(x) − g_base(z)‖ / ‖x − z‖`.
    pub fn diffusion_lipschitz(pair: &CoefficientPair, law: &StationaryLaw, x: &[f64], z: &[f64]) -> Result<Self> {
        let mut d = pair.base_diffusion(x);
        d.axpy(-1.0, &pair.base_diffusion(z));
        let dx: f64 = x.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dx == 0.0 {
            return Err(Error::param("z", "must differ from x"));
        }
        Ok(Self {
            modulation: pair.m_g,
            mean: average_modulation(pair.m_g, law, 32)?,
            scale: d.frobenius_norm() / dx,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicConfig {
    pub epsilons: Vec<f64>,
    #[serde(default = "one")]
    pub horizon: f64,
    /// Intervals of the grid on which the `C^{−δ}` supremum is taken.
    #[serde(default = "default_norm_steps")]
    pub norm_steps: usize,
    pub delta: f64,
    pub p: f64,
    pub replicas: usize,
    pub seed: u64,
}

fn default_norm_steps() -> usize {
    8
}

#[derive(Debug, Clone)]
pub struct ErgodicReport {
    pub epsilons: Vec<f64>,
    /// `L^p` ensemble mean of the `C^{−δ}` deviation per `ε`.
    pub values: Vec<f64>,
    /// Per-`ε`, per-replica deviations.
    pub samples: Vec<Vec<f64>>,
    pub fit: RateFit,
}

/// `‖ |G_ε − ḡ|_{C^{−δ}} ‖_{L^p}` for each `ε`, with a log–log fit against `ε`.
///
/// The primitive `∫_0^t (m(Y_{r/ε}) − E m) dr` is accumulated at the fast
/// resolution `ε·fine_step` and read off on a uniform grid of `norm_steps`
/// intervals of `[0, horizon]`, where the supremum is taken.
pub fn ergodic_deviation(func: &ErgodicFunctional, fast: &FastSpec, cfg: &ErgodicConfig) -> Result<ErgodicReport> {
    if cfg.epsilons.len() < 5 {
        return Err(Error::NotEnoughPoints {
            needed: 5,
            got: cfg.epsilons.len(),
        });
    }
    if !(cfg.p >= 2.0) {
        return Err(Error::param("p", "ergodic deviation needs p >= 2"));
    }
    if cfg.replicas == 0 || cfg.norm_steps == 0 {
        return Err(Error::param("replicas", "need at least one replica and one interval"));
    }
    if let Some(e) = cfg.epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::param("epsilons", format!("must be positive, got {e}")));
    }
    fast.validate()?;
    let mut samples = Vec::with_capacity(cfg.epsilons.len());
    for (ie, &eps) in cfg.epsilons.iter().enumerate() {
        let eps_seed = derive_seed(derive_seed(cfg.seed, stream::FAST), ie as u64);
        let row: Vec<f64> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| deviation_once(func, fast, cfg, eps, derive_seed(eps_seed, r as u64)))
            .collect::<Result<_>>()?;
        samples.push(row);
    }
    let values: Vec<f64> = samples.iter().map(|s| lp_mean(s, cfg.p)).collect();
    let fit = if values.iter().all(|v| *v > 0.0) {
        fit_rate(&cfg.epsilons, &values)?
    } else {
        RateFit {
            slope: 0.0,
            intercept: f64::NEG_INFINITY,
            r_squared: 0.0,
            points: values.len(),
        }
    };
    Ok(ErgodicReport {
        epsilons: cfg.epsilons.clone(),
        values,
        samples,
        fit,
    })
}

fn deviation_once(func: &ErgodicFunctional, fast: &FastSpec, cfg: &ErgodicConfig, eps: f64, seed: u64) -> Result<f64> {
    if func.scale == 0.0 || func.modulation == Modulation::None {
        return Ok(0.0);
    }
    let y = sample_fast_path(fast, cfg.horizon / eps, seed)?;
    let dt = eps * fast.fine_step;
    let dt_norm = cfg.horizon / cfg.norm_steps as f64;
    let mut prim = Vec::with_capacity(cfg.norm_steps + 1);
    prim.push(0.0);
    let mut acc = 0.0;
    let mut prev = func.modulation.eval(y.values()[0]) - func.mean;
    let mut next_mark = 1;
    for (k, yk) in y.values().iter().enumerate().skip(1) {
        let cur = func.modulation.eval(*yk) - func.mean;
        acc += 0.5 * dt * (prev + cur);
        prev = cur;
        let t = k as f64 * dt;
        while next_mark <= cfg.norm_steps && t >= next_mark as f64 * dt_norm - 1e-9 * dt_norm {
            prim.push(acc);
            next_mark += 1;
        }
    }
    while prim.len() < cfg.norm_steps + 1 {
        prim.push(acc);
    }
    Ok(func.scale * neg_holder_norm_scalar_primitive(&prim, dt_norm, cfg.delta)?)
}

/// Coefficients of the slow equation along a fast path, `Y` held
/// piecewise constant on its own grid of step `ε·fine_step`.
///
/// On each slow cell `[t_k, t_{k+1})` the modulations are replaced by their
/// exact cell averages, `(1/Δt)∫ m(Y_{r/ε}) dr`. This is the left-point
/// scheme for the Young integral against the piecewise-linear interpolation
/// of the driver, so the fast oscillation inside a cell is integrated out
/// instead of being sampled once.
pub struct FrozenFast<'a> {
    pair: &'a CoefficientPair,
    dt: f64,
    c_f: Vec<f64>,
    c_g: Vec<f64>,
}

impl<'a> FrozenFast<'a> {
    pub fn new(pair: &'a CoefficientPair, fast: &ScalarPath, epsilon: f64, slow: &TimeGrid) -> Result<Self> {
        let h = epsilon * fast.grid().dt();
        let horizon = slow.time(slow.steps());
        if (fast.values().len() as f64) * h < horizon * (1.0 - 1e-12) {
            return Err(Error::param("fast", "fast path shorter than the slow horizon over epsilon"));
        }
        let c_f = cell_averages(pair.m_f, fast.values(), h, slow);
        let c_g = cell_averages(pair.m_g, fast.values(), h, slow);
        Ok(Self {
            pair,
            dt: slow.dt(),
            c_f,
            c_g,
        })
    }

    /// Cell averages of `(m_f, m_g)` on slow cell `k`.
    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.c_f[k], self.c_g[k])
    }
}

fn cell_averages(m: Modulation, y: &[f64], h: f64, slow: &TimeGrid) -> Vec<f64> {
    if m == Modulation::None {
        return vec![1.0; slow.steps()];
    }
    let vals: Vec<f64> = y.iter().map(|v| m.eval(*v)).collect();
    // ∫_0^t of the piecewise-constant signal
    let mut cum = Vec::with_capacity(vals.len() + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for v in &vals {
        acc += v * h;
        cum.push(acc);
    }
    let prim = |t: f64| -> f64 {
        let x = t / h;
        let j = (x.floor() as usize).min(vals.len() - 1);
        cum[j] + vals[j] * (t - j as f64 * h)
    };
    let dt = slow.dt();
    (0..slow.steps())
        .map(|k| (prim(slow.time(k + 1)) - prim(slow.time(k))) / dt)
        .collect()
}

impl Coefficients for FrozenFast<'_> {
    fn n_modes(&self) -> usize {
        self.pair.n_modes()
    }

    fn m_modes(&self) -> usize {
        self.pair.m_modes()
    }

    fn eval(&self, t: f64, x: &[f64]) -> (SpectralVector, SpectralOperator) {
        let k = ((t / self.dt + 1e-9).floor() as usize).min(self.c_f.len() - 1);
        let mut f = self.pair.base_drift(x);
        f.scale(self.c_f[k]);
        let mut g = self.pair.base_diffusion(x);
        g.scale(self.c_g[k]);
        (f, g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingConfig {
    pub epsilons: Vec<f64>,
    #[serde(default = "one")]
    pub horizon: f64,
    pub slow_steps: usize,
    pub alpha: f64,
    pub hurst: f64,
    pub n_modes: usize,
    #[serde(default)]
    pub q: QSpecConfig,
    pub replicas: usize,
    #[serde(default = "two")]
    pub p: f64,
    pub seed: u64,
    /// Initial state; defaults to `x0_k = 2^{−k}`.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_order")]
    pub hermite_order: usize,
}

fn two() -> f64 {
    2.0
}

fn default_order() -> usize {
    16
}

impl AveragingConfig {
    fn x0(&self) -> SpectralVector {
        match &self.x0 {
            Some(v) => v.clone().into(),
            None => (0..self.n_modes).map(|k| 0.5f64.powi(k as i32)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AveragingRow {
    pub epsilon: f64,
    pub distances: Vec<f64>,
    pub median: f64,
    pub q90: f64,
}

#[derive(Debug, Clone)]
pub struct AveragingReport {
    pub rows: Vec<AveragingRow>,
}

impl AveragingReport {
    pub fn medians(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.median).collect()
    }
}

/// Per replica: one Q-fBm driver and one fast path on `[0, T/ε_min]`, both on
/// disjoint seed streams; `X̄` solved once, `X^ε` for every `ε` with the same
/// driver and `x0`; distances in the mild Hölder seminorm of order `α`.
pub fn run_averaging_experiment(cfg: &AveragingConfig, fast: &FastSpec, pair: &CoefficientPair) -> Result<AveragingReport> {
    if cfg.epsilons.is_empty() {
        return Err(Error::Empty("epsilons"));
    }
    if let Some(e) = cfg.epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::param("epsilons", format!("must be positive, got {e}")));
    }
    if !(cfg.alpha < cfg.hurst) {
        return Err(Error::param("alpha", "must be below the Hurst parameter"));
    }
    if pair.n_modes() != cfg.n_modes {
        return Err(Error::DimensionMismatch {
            context: "averaging n_modes",
            expected: cfg.n_modes,
            got: pair.n_modes(),
        });
    }
    fast.validate()?;
    let law = fast
        .gaussian_law()
        .ok_or_else(|| Error::param("fast", "averaging needs a fast process with a known Gaussian law"))?;
    let gen = pair.generator().clone();
    let q = QSpec::from_config(&cfg.q)?;
    if q.m_modes() != pair.m_modes() {
        return Err(Error::DimensionMismatch {
            context: "averaging m_modes",
            expected: pair.m_modes(),
            got: q.m_modes(),
        });
    }
    let grid = TimeGrid::uniform(cfg.horizon, cfg.slow_steps)?;
    let sampler = QfbmSampler::new(q, cfg.hurst, grid)?;
    let averaged = average_coefficient(pair, &law, cfg.hermite_order)?;
    let eps_min = cfg.epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let x0 = cfg.x0();
    let solve_cfg = SolveConfig::new(x0);
    let driver_seed = derive_seed(cfg.seed, stream::DRIVER);
    let fast_seed = derive_seed(cfg.seed, stream::FAST);

    let per_replica: Vec<Vec<f64>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let h = sampler.sample(derive_seed(driver_seed, r as u64));
            let y = sample_fast_path(fast, cfg.horizon / eps_min, derive_seed(fast_seed, r as u64))?;
            let x_bar = solve_mild(&gen, &averaged, &h, &solve_cfg)?.path;
            cfg.epsilons
                .iter()
                .map(|&eps| {
                    let frozen = FrozenFast::new(pair, &y, eps, &grid)?;
                    let x_eps = solve_mild(&gen, &frozen, &h, &solve_cfg)?.path;
                    mild_holder_norm(&gen, &x_eps.difference(&x_bar)?, cfg.alpha)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let rows = cfg
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &epsilon)| {
            let distances: Vec<f64> = per_replica.iter().map(|d| d[i]).collect();
            AveragingRow {
                epsilon,
                median: median(&distances),
                q90: quantile(&distances, 0.9),
                distances,
            }
        })
        .collect();
    Ok(AveragingReport { rows })
}

/// `E(X^ε_t − X̄_t)² = t·(1 + (1 − √(2(e + e³)))/e²)`.
pub fn counterexample_constant(t: f64) -> f64 {
    let e = std::f64::consts::E;
    t * (1.0 + (1.0 - (2.0 * (e + e.powi(3))).sqrt()) / (e * e))
}

/// `η = √(½(1 + e^{−2}))`
pub fn counterexample_eta() -> f64 {
    (0.5 * (1.0 + (-2.0f64).exp())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CounterexampleIntegrand {
    #[default]
    Cos,
    /// `cos(Y)` replaced by the constant `η`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleReport {
    pub eps: f64,
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub expected: f64,
}

/// Monte Carlo estimate of `E(X^ε_t − X̄_t)²` for `dX^ε = cos(Y_{s/ε}) dW̃`,
/// `X̄ = η W̃`, with `Y` a stationary OU process independent of `W̃`.
pub fn wiener_counterexample(
    eps: f64,
    t: f64,
    replicas: usize,
    steps: usize,
    seed: u64,
    integrand: CounterexampleIntegrand,
) -> Result<CounterexampleReport> {
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if replicas < 2 || steps == 0 {
        return Err(Error::param("replicas", "need at least two replicas and one step"));
    }
    let eta = counterexample_eta();
    let dt = t / steps as f64;
    let a = (-dt / eps).exp();
    let b = (1.0 - a * a).sqrt();
    let fast_seed = derive_seed(seed, stream::FAST);
    let driver_seed = derive_seed(seed, stream::DRIVER);
    let sq: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut ry = rng::rng_from_seed(derive_seed(fast_seed, r as u64));
            let mut rw = rng::rng_from_seed(derive_seed(driver_seed, r as u64));
            let mut y = rng::standard_normal(&mut ry);
            let mut d = 0.0;
            for _ in 0..steps {
                let dw = dt.sqrt() * rng::standard_normal(&mut rw);
                let m = match integrand {
                    CounterexampleIntegrand::Cos => y.cos(),
                    CounterexampleIntegrand::Constant => eta,
                };
                d += (m - eta) * dw;
                y = a * y + b * rng::standard_normal(&mut ry);
            }
            d * d
        })
        .collect();
    let (estimate, stderr) = crate::holder::mean_stderr(&sq);
    Ok(CounterexampleReport {
        eps,
        t,
        estimate,
        stderr,
        expected: match integrand {
            CounterexampleIntegrand::Cos => counterexample_constant(t),
            CounterexampleIntegrand::Constant => 0.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_constant_value() {
        assert!((counterexample_constant(1.0) - 0.221_369_737_344_092_5).abs() < 1e-14);
        // same constant from E(cos Y − η)² with E cos Y = e^{−1/2}, E cos² Y = η²
        let eta = counterexample_eta();
        let alt = 2.0 * eta * eta - 2.0 * eta * (-0.5f64).exp();
        assert!((alt - counterexample_constant(1.0)).abs() < 1e-14);
    }

    #[test]
    fn tv_reference_values() {
        assert_eq!(tv_to_stationary_ou(0.0, 0.0).unwrap(), 1.0);
        let v = tv_to_stationary_ou(1.0, 1.0).unwrap();
        assert!((v - 0.153_822_906_624_051_2).abs() < 1e-10, "{v}");
        let mut last = 1.0;
        for k in 1..40 {
            let v = tv_to_stationary_ou(1.0, 0.1 * k as f64).unwrap();
            assert!(v <= last + 1e-14);
            last = v;
        }
        assert!(last < 1e-2);
        assert!(tv_to_stationary_ou(1.0, -1.0).is_err());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(1.5) - 0.886_226_925_452_758).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
        assert!((frac_ou_stationary_variance(0.75, 1.0, 1.0) - 0.664_670_194_089_568_5).abs() < 1e-12);
    }

    #[test]
    fn coarse_fast_step_rejected() {
        assert!(sample_fast_path(&FastSpec::ou(0.2), 1.0, 1).is_err());
        let mut s = FastSpec::frac_ou(0.75, 4.0, 0.5, 1.0, 1.0, 0.05);
        assert!(sample_fast_path(&s, 1.0, 1).is_err());
        s.fine_step = 0.01;
        sample_fast_path(&s, 1.0, 1).unwrap();
    }

    #[test]
    fn drift_pieces_join() {
        let (k, l, r) = (1.0, 0.5, 1.0);
        assert!((frac_ou_drift(r, k, l, r) - frac_ou_drift(r + 1e-12, k, l, r)).abs() < 1e-10);
        assert!(frac_ou_drift(0.1, k, l, r) > 0.0);
        assert!(frac_ou_drift(3.0, k, l, r) < 0.0);
    }

    #[test]
    fn constant_integrand_has_zero_difference() {
        let r = wiener_counterexample(0.1, 1.0, 10, 20, 3, CounterexampleIntegrand::Constant).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn ergodic_needs_five_levels() {
        let f = ErgodicFunctional::bare(Modulation::Cos, &StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 }).unwrap();
        let cfg = ErgodicConfig {
            epsilons: vec![0.5, 0.25],
            horizon: 1.0,
            norm_steps: 8,
            delta: 0.3,
            p: 2.0,
            replicas: 4,
            seed: 1,
        };
        assert!(matches!(
            ergodic_deviation(&f, &FastSpec::ou(0.01), &cfg),
            Err(Error::NotEnoughPoints { .. })
        ));
    }
}
