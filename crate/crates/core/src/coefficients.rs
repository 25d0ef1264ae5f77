//! Nemytskii-type drift and diffusion built from bounded outer functions, a
//! smooth bump, and a scalar modulation by the fast variable.
//!
//! States are cosine coefficients on `[0, π]` (the Neumann eigenbasis behind
//! `mu_k = 1 + k²`). A Nemytskii operator `T_G` is applied by collocation: the
//! state is evaluated at the midpoints `η_j = π(j+½)/N`, `G` acts pointwise,
//! and the result is projected back with the midpoint rule, which is exactly
//! orthonormal on the first `N` cosines.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;
use crate::rng;
use crate::spectral::{DiagonalGenerator, SpectralOperator, SpectralVector};

/// `φ(r) = exp(1 − 1/(1 − (r/R)²))` for `|r| < R`, zero beyond; `φ(0) = 1`.
pub fn bump(r: f64, radius: f64) -> f64 {
    let z = r / radius;
    if z.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - z * z)).exp()
}

/// Mode-to-point transform on the cosine basis.
#[derive(Debug, Clone)]
pub struct Collocation {
    n_modes: usize,
    points: usize,
    // row j holds e_k(η_j), k = 0..n_modes
    basis: Vec<f64>,
}

impl Collocation {
    pub fn new(n_modes: usize, points: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::param("n_modes", "must be at least 1"));
        }
        if points < 2 * n_modes {
            return Err(Error::param(
                "collocation_points",
                format!("{points} points cannot resolve {n_modes} modes without aliasing (need >= {})", 2 * n_modes),
            ));
        }
        let mut basis = vec![0.0; points * n_modes];
        let c0 = (1.0 / PI).sqrt();
        let ck = (2.0 / PI).sqrt();
        for j in 0..points {
            let eta = PI * (j as f64 + 0.5) / points as f64;
            for k in 0..n_modes {
                basis[j * n_modes + k] = if k == 0 { c0 } else { ck * (k as f64 * eta).cos() };
            }
        }
        Ok(Self {
            n_modes,
            points,
            basis,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn to_points(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_modes);
        self.basis
            .chunks_exact(self.n_modes)
            .map(|row| row.iter().zip(x).map(|(e, c)| e * c).sum())
            .collect()
    }

    pub fn to_modes(&self, values: &[f64]) -> SpectralVector {
        let w = PI / self.points as f64;
        let mut out = vec![0.0; self.n_modes];
        for (row, v) in self.basis.chunks_exact(self.n_modes).zip(values) {
            for (o, e) in out.iter_mut().zip(row) {
                *o += w * e * v;
            }
        }
        out.into()
    }
}

/// Fast-variable modulation `m(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    #[default]
    Cos,
    Identity,
    /// `m ≡ 1`
    None,
}

impl Modulation {
    #[inline]
    pub fn eval(self, y: f64) -> f64 {
        match self {
            Modulation::Cos => y.cos(),
            Modulation::Identity => y,
            Modulation::None => 1.0,
        }
    }
}

/// Outer functions `ψ_i(u) = sin(c_i u)`, bump radius and noise weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NemytskiiSpec {
    /// `c_0` drives the drift, `c_1..=c_m` the diffusion columns.
    pub psi_freqs: Vec<f64>,
    pub bump_radius: f64,
    /// Weights `a_i` of the noise directions, one per noise mode.
    pub a: Vec<f64>,
    pub collocation_points: usize,
    /// Exponent of the `H_{−α}` norm inside the diffusion bump.
    pub alpha: f64,
}

impl NemytskiiSpec {
    /// `c_i = 1 + 0.1 i`, `a_i = 2^{−i}`, `N = 2·n_modes`.
    pub fn default_for(n_modes: usize, m_modes: usize) -> Self {
        Self {
            psi_freqs: (0..=m_modes).map(|i| 1.0 + 0.1 * i as f64).collect(),
            bump_radius: 4.0,
            a: (0..m_modes).map(|i| 0.5f64.powi(i as i32)).collect(),
            collocation_points: 2 * n_modes,
            alpha: 0.5,
        }
    }

    pub fn m_modes(&self) -> usize {
        self.a.len()
    }

    /// `(Σ a_i²)^{1/2}`
    pub fn a_norm(&self) -> f64 {
        self.a.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.psi_freqs.len() != self.a.len() + 1 {
            return Err(Error::DimensionMismatch {
                context: "psi_freqs (drift + one per noise mode)",
                expected: self.a.len() + 1,
                got: self.psi_freqs.len(),
            });
        }
        if !(self.bump_radius > 0.0) {
            return Err(Error::param("bump_radius", "must be positive"));
        }
        if self.a.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("a", "weights must be finite"));
        }
        Ok(())
    }
}

/// `T_{ψ_i}(x)` with `ψ_i(u) = sin(c_i u)`.
pub fn nemytskii_apply(spec: &NemytskiiSpec, outer_index: usize, x: &SpectralVector) -> Result<SpectralVector> {
    let c = *spec
        .psi_freqs
        .get(outer_index)
        .ok_or_else(|| Error::param("outer_index", format!("no outer function {outer_index}")))?;
    let col = Collocation::new(x.len(), spec.collocation_points)?;
    let pts = col.to_points(x);
    Ok(col.to_modes(&pts.iter().map(|u| (c * u).sin()).collect::<Vec<_>>()))
}

/// Coefficients of the slow equation, evaluated at time `t` and state `x`.
pub trait Coefficients: Sync {
    fn n_modes(&self) -> usize;
    fn m_modes(&self) -> usize;
    /// `(f(t, x), g(t, x))`
    fn eval(&self, t: f64, x: &[f64]) -> (SpectralVector, SpectralOperator);
}

/// Drift/diffusion pair `f(x,y) = m_f(y)·φ(‖x‖²)·T_{ψ0}(x)` and
/// `g(x,y)e_i = a_i·m_g(y)·φ(‖x‖²_{−α})·T_{ψ_i}(x)`.
#[derive(Debug, Clone)]
pub struct CoefficientPair {
    spec: NemytskiiSpec,
    gen: DiagonalGenerator,
    col: Collocation,
    pub m_f: Modulation,
    pub m_g: Modulation,
}

impl CoefficientPair {
    pub fn new(spec: NemytskiiSpec, gen: DiagonalGenerator, m_f: Modulation, m_g: Modulation) -> Result<Self> {
        spec.validate()?;
        let col = Collocation::new(gen.n_modes(), spec.collocation_points)?;
        Ok(Self {
            spec,
            gen,
            col,
            m_f,
            m_g,
        })
    }

    /// `build_pair` with the same modulation for drift and diffusion.
    pub fn build(spec: NemytskiiSpec, gen: DiagonalGenerator, modulation: Modulation) -> Result<Self> {
        Self::new(spec, gen, modulation, modulation)
    }

    pub fn spec(&self) -> &NemytskiiSpec {
        &self.spec
    }

    pub fn generator(&self) -> &DiagonalGenerator {
        &self.gen
    }

    pub fn n_modes(&self) -> usize {
        self.gen.n_modes()
    }

    pub fn m_modes(&self) -> usize {
        self.spec.m_modes()
    }

    /// y-independent factor of the drift.
    pub fn base_drift(&self, x: &[f64]) -> SpectralVector {
        let r = x.iter().map(|v| v * v).sum::<f64>();
        let phi = bump(r, self.spec.bump_radius);
        if phi == 0.0 {
            return SpectralVector::zeros(x.len());
        }
        let c = self.spec.psi_freqs[0];
        let pts = self.col.to_points(x);
        let mut out = self.col.to_modes(&pts.iter().map(|u| (c * u).sin()).collect::<Vec<_>>());
        out.scale(phi);
        out
    }

    /// y-independent factor of the diffusion.
    pub fn base_diffusion(&self, x: &[f64]) -> SpectralOperator {
        let m = self.m_modes();
        let r = self.gen.fractional_norm(-self.spec.alpha, x).powi(2);
        let phi = bump(r, self.spec.bump_radius);
        if phi == 0.0 {
            return SpectralOperator::zeros(x.len(), m);
        }
        let pts = self.col.to_points(x);
        let columns: Vec<SpectralVector> = (0..m)
            .map(|i| {
                let c = self.spec.psi_freqs[i + 1];
                let mut v = self.col.to_modes(&pts.iter().map(|u| (c * u).sin()).collect::<Vec<_>>());
                v.scale(self.spec.a[i] * phi);
                v
            })
            .collect();
        SpectralOperator::from_columns(&columns).expect("columns share the state dimension")
    }

    pub fn drift(&self, x: &[f64], y: f64) -> SpectralVector {
        let mut f = self.base_drift(x);
        f.scale(self.m_f.eval(y));
        f
    }

    pub fn diffusion(&self, x: &[f64], y: f64) -> SpectralOperator {
        let mut g = self.base_diffusion(x);
        g.scale(self.m_g.eval(y));
        g
    }

    /// The pair with the fast variable frozen at `y`.
    pub fn frozen(&self, y: f64) -> ScaledPair<'_> {
        ScaledPair {
            pair: self,
            c_f: self.m_f.eval(y),
            c_g: self.m_g.eval(y),
        }
    }

    /// Sampled Lipschitz constants in `x` and the sup of `‖f‖`, over random
    /// pairs in the ball of radius `radius`.
    pub fn lipschitz_report(&self, y: f64, samples: usize, radius: f64, seed: u64) -> LipschitzReport {
        let mut r = rng::rng_from_seed(seed);
        let n = self.n_modes();
        let draw = |r: &mut rng::SimRng| -> Vec<f64> {
            let v: Vec<f64> = (0..n).map(|_| rng::standard_normal(r)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let rad = radius * r.gen::<f64>().powf(1.0 / n as f64);
            v.into_iter().map(|a| a * rad / norm).collect()
        };
        let mut rep = LipschitzReport::default();
        for _ in 0..samples {
            let x1 = draw(&mut r);
            let x2 = draw(&mut r);
            let d: f64 = x1.iter().zip(&x2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if d == 0.0 {
                continue;
            }
            let f1 = self.drift(&x1, y);
            let f2 = self.drift(&x2, y);
            let mut g1 = self.diffusion(&x1, y);
            let g2 = self.diffusion(&x2, y);
            rep.drift_lipschitz = rep.drift_lipschitz.max((&f1 - &f2).norm() / d);
            rep.drift_sup = rep.drift_sup.max(f1.norm()).max(f2.norm());
            rep.diffusion_sup = rep.diffusion_sup.max(g1.frobenius_norm()).max(g2.frobenius_norm());
            g1.axpy(-1.0, &g2);
            rep.diffusion_lipschitz = rep.diffusion_lipschitz.max(g1.frobenius_norm() / d);
            rep.samples += 1;
        }
        rep
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LipschitzReport {
    pub drift_lipschitz: f64,
    pub diffusion_lipschitz: f64,
    pub drift_sup: f64,
    pub diffusion_sup: f64,
    pub samples: usize,
}

/// `(c_f·f_base, c_g·g_base)`: the pair at a frozen fast state, or the
/// averaged pair with `c = E_π m(Y)`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledPair<'a> {
    pair: &'a CoefficientPair,
    pub c_f: f64,
    pub c_g: f64,
}

impl Coefficients for ScaledPair<'_> {
    fn n_modes(&self) -> usize {
        self.pair.n_modes()
    }

    fn m_modes(&self) -> usize {
        self.pair.m_modes()
    }

    fn eval(&self, _t: f64, x: &[f64]) -> (SpectralVector, SpectralOperator) {
        let mut f = self.pair.base_drift(x);
        f.scale(self.c_f);
        let mut g = self.pair.base_diffusion(x);
        g.scale(self.c_g);
        (f, g)
    }
}

/// Stationary law of the fast process.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryLaw {
    Gaussian { mean: f64, sd: f64 },
    /// Long-run samples of the fast process.
    Empirical(Vec<f64>),
}

/// Minimum Gauss–Hermite order accepted for averaging.
pub const MIN_HERMITE_ORDER: usize = 8;

/// `E_π m(Y)`.
pub fn average_modulation(m: Modulation, law: &StationaryLaw, order: usize) -> Result<f64> {
    let constant = m == Modulation::None;
    match law {
        StationaryLaw::Gaussian { mean, sd } => {
            if order < MIN_HERMITE_ORDER {
                return Err(Error::param(
                    "order",
                    format!("Gauss-Hermite order must be >= {MIN_HERMITE_ORDER}, got {order}"),
                ));
            }
            if constant {
                return Ok(1.0);
            }
            Ok(GaussHermite::new(order)?.expect_normal(*mean, *sd, |y| m.eval(y)))
        }
        StationaryLaw::Empirical(samples) => {
            if samples.is_empty() {
                return Err(Error::Empty("empirical stationary sample"));
            }
            if constant {
                return Ok(1.0);
            }
            Ok(samples.iter().map(|y| m.eval(*y)).sum::<f64>() / samples.len() as f64)
        }
    }
}

/// `f̄(x) = ∫ f(x,y) π(dy)`, `ḡ` likewise. The pair factors as
/// `m(y)·base(x)`, so the average is the base coefficient scaled by `E_π m`.
pub fn average_coefficient<'a>(pair: &'a CoefficientPair, law: &StationaryLaw, order: usize) -> Result<ScaledPair<'a>> {
    Ok(ScaledPair {
        pair,
        c_f: average_modulation(pair.m_f, law, order)?,
        c_g: average_modulation(pair.m_g, law, order)?,
    })
}

/// Config block for the coefficient pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default)]
    pub psi_freqs: Option<Vec<f64>>,
    #[serde(default = "default_radius")]
    pub bump_radius: f64,
    #[serde(default = "default_decay")]
    pub a_decay: f64,
    #[serde(default)]
    pub modulation: Modulation,
    #[serde(default)]
    pub collocation_points: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_radius() -> f64 {
    4.0
}

fn default_decay() -> f64 {
    0.5
}

fn default_alpha() -> f64 {
    0.5
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        Self {
            psi_freqs: None,
            bump_radius: default_radius(),
            a_decay: default_decay(),
            modulation: Modulation::Cos,
            collocation_points: None,
            alpha: default_alpha(),
        }
    }
}

impl CoefficientConfig {
    pub fn build(&self, gen: &DiagonalGenerator, m_modes: usize) -> Result<CoefficientPair> {
        let mut spec = NemytskiiSpec::default_for(gen.n_modes(), m_modes);
        if let Some(c) = &self.psi_freqs {
            spec.psi_freqs = c.clone();
        }
        spec.bump_radius = self.bump_radius;
        spec.a = (0..m_modes).map(|i| self.a_decay.powi(i as i32)).collect();
        if let Some(n) = self.collocation_points {
            spec.collocation_points = n;
        }
        spec.alpha = self.alpha;
        CoefficientPair::build(spec, gen.clone(), self.modulation)
    }
}
