//! Diagonal model of the sectorial generator `A`.
//!
//! States live in the span of the first `n_modes` eigenfunctions of `A`, so
//! the semigroup, the fractional powers `(−A)^κ` and the interpolation norms
//! all act mode by mode on coefficient vectors.

use std::ops::{Add, AddAssign, Deref, DerefMut, Mul, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues `mu_k > 0` of `−A`, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGenerator {
    mu: Vec<f64>,
}

impl DiagonalGenerator {
    /// `A = Δ − 1` on `[0, π]` with Neumann conditions: `mu_k = 1 + k²`.
    pub fn laplacian_shifted(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::param("n_modes", "must be at least 1"));
        }
        Ok(Self {
            mu: (0..n_modes).map(|k| 1.0 + (k * k) as f64).collect(),
        })
    }

    pub fn explicit(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Empty("eigenvalue list"));
        }
        if let Some(bad) = mu.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::param("mu", format!("eigenvalues must be positive, got {bad}")));
        }
        if mu.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("mu", "eigenvalues must be sorted ascending"));
        }
        Ok(Self { mu })
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self> {
        match spec {
            GeneratorSpec::LaplacianShifted { n_modes } => Self::laplacian_shifted(*n_modes),
            GeneratorSpec::Explicit { mu } => Self::explicit(mu.clone()),
        }
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn n_modes(&self) -> usize {
        self.mu.len()
    }

    /// Spectral gap `ν = min mu`; `‖S_t‖ = e^{−νt}`.
    pub fn nu(&self) -> f64 {
        self.mu[0]
    }

    fn check_dim(&self, context: &'static str, got: usize) -> Result<()> {
        if got != self.n_modes() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n_modes(),
                got,
            });
        }
        Ok(())
    }

    /// Mode-wise factors `e^{−mu_k t}`.
    pub fn semigroup_factors(&self, t: f64) -> Vec<f64> {
        self.mu.iter().map(|m| (-m * t).exp()).collect()
    }

    /// Mode-wise factors `(1 − e^{−mu_k t}) / mu_k` of `∫_0^t S_r dr`.
    pub fn integrated_factors(&self, t: f64) -> Vec<f64> {
        self.mu.iter().map(|m| -(-m * t).exp_m1() / m).collect()
    }

    pub fn apply_semigroup(&self, t: f64, x: &SpectralVector) -> Result<SpectralVector> {
        if !(t >= 0.0) {
            return Err(Error::param("t", format!("semigroup time must be nonnegative, got {t}")));
        }
        self.check_dim("apply_semigroup", x.len())?;
        Ok(x.iter()
            .zip(&self.mu)
            .map(|(xk, m)| (-m * t).exp() * xk)
            .collect())
    }

    /// Operator norm of `S_t`, exactly `e^{−νt}` in the diagonal model.
    pub fn semigroup_norm(&self, t: f64) -> f64 {
        (-self.nu() * t).exp()
    }

    /// `(Σ_k mu_k^{2κ} x_k²)^{1/2}`.
    pub fn fractional_norm(&self, kappa: f64, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_modes());
        if kappa == 0.0 {
            return l2_norm(x);
        }
        x.iter()
            .zip(&self.mu)
            .map(|(xk, m)| m.powf(2.0 * kappa) * xk * xk)
            .sum::<f64>()
            .sqrt()
    }

    /// `(−A)^κ x`, coefficient `k` is `mu_k^κ x_k`.
    pub fn apply_fractional_power(&self, kappa: f64, x: &SpectralVector) -> Result<SpectralVector> {
        self.check_dim("apply_fractional_power", x.len())?;
        Ok(x.iter()
            .zip(&self.mu)
            .map(|(xk, m)| m.powf(kappa) * xk)
            .collect())
    }
}

/// Serializable generator block of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    LaplacianShifted { n_modes: usize },
    Explicit { mu: Vec<f64> },
}

/// Transport of past values to the present: `x ↦ S_t x`.
///
/// The identity propagator turns mild constructions into their classical
/// counterparts (plain Young integrals, plain Hölder norms).
pub trait Propagator: Sync {
    fn propagate(&self, t: f64, x: &mut [f64]);

    /// Mode-wise transport factors over `t`. Propagators are diagonal in the
    /// state basis, so these determine `propagate` completely.
    fn factors(&self, t: f64, dim: usize) -> Vec<f64> {
        let mut f = vec![1.0; dim];
        self.propagate(t, &mut f);
        f
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Propagator for Identity {
    fn propagate(&self, _t: f64, _x: &mut [f64]) {}
}

impl Propagator for DiagonalGenerator {
    fn propagate(&self, t: f64, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_modes());
        for (xk, m) in x.iter_mut().zip(&self.mu) {
            *xk *= (-m * t).exp();
        }
    }
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// State coordinates in the eigenbasis of `A`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralVector(Vec<f64>);

impl SpectralVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    /// `self += a·x`
    pub fn axpy(&mut self, a: f64, x: &[f64]) {
        debug_assert_eq!(self.len(), x.len());
        for (s, v) in self.0.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.0.iter_mut().for_each(|v| *v *= a);
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for SpectralVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SpectralVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for SpectralVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl FromIterator<f64> for SpectralVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl AddAssign<&SpectralVector> for SpectralVector {
    fn add_assign(&mut self, rhs: &SpectralVector) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralVector> for SpectralVector {
    fn sub_assign(&mut self, rhs: &SpectralVector) {
        self.axpy(-1.0, rhs);
    }
}

impl Add for &SpectralVector {
    type Output = SpectralVector;
    fn add(self, rhs: &SpectralVector) -> SpectralVector {
        self.iter().zip(rhs.iter()).map(|(a, b)| a + b).collect()
    }
}

impl Sub for &SpectralVector {
    type Output = SpectralVector;
    fn sub(self, rhs: &SpectralVector) -> SpectralVector {
        self.iter().zip(rhs.iter()).map(|(a, b)| a - b).collect()
    }
}

impl Mul<f64> for &SpectralVector {
    type Output = SpectralVector;
    fn mul(self, a: f64) -> SpectralVector {
        self.iter().map(|v| v * a).collect()
    }
}

/// Linear map from noise coordinates (`cols`) to state modes (`rows`),
/// stored dense and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SpectralOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "SpectralOperator::from_row_major",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Operator whose column `i` is `columns[i]`.
    pub fn from_columns(columns: &[SpectralVector]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut op = Self::zeros(rows, cols);
        for (i, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    context: "SpectralOperator::from_columns",
                    expected: rows,
                    got: c.len(),
                });
            }
            for (k, v) in c.iter().enumerate() {
                op.data[k * cols + i] = *v;
            }
        }
        Ok(op)
    }

    /// `v ⊗ w`: maps `h ↦ ⟨w, h⟩ v`.
    pub fn rank_one(v: &[f64], w: &[f64]) -> Self {
        let mut op = Self::zeros(v.len(), w.len());
        for (k, vk) in v.iter().enumerate() {
            for (i, wi) in w.iter().enumerate() {
                op.data[k * w.len() + i] = vk * wi;
            }
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> SpectralVector {
        (0..self.rows).map(|k| self.get(k, col)).collect()
    }

    pub fn apply(&self, h: &[f64]) -> SpectralVector {
        let mut out = SpectralVector::zeros(self.rows);
        self.apply_add(1.0, h, &mut out);
        out
    }

    /// `out += a · self·h`
    pub fn apply_add(&self, a: f64, h: &[f64], out: &mut [f64]) {
        debug_assert_eq!(h.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.data[k * self.cols..(k + 1) * self.cols];
            *o += a * row.iter().zip(h).map(|(r, x)| r * x).sum::<f64>();
        }
    }

    /// Multiplies row `k` by `factors[k]` (left action of a diagonal map).
    pub fn scale_rows(&mut self, factors: &[f64]) {
        debug_assert_eq!(factors.len(), self.rows);
        for (k, f) in factors.iter().enumerate() {
            self.data[k * self.cols..(k + 1) * self.cols]
                .iter_mut()
                .for_each(|v| *v *= f);
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a·other`
    pub fn axpy(&mut self, a: f64, other: &SpectralOperator) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        l2_norm(&self.data)
    }

    /// Largest singular value, by power iteration on `AᵀA`.
    pub fn operator_norm(&self) -> f64 {
        if self.cols == 0 || self.rows == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (self.cols as f64).sqrt(); self.cols];
        let mut sigma = 0.0;
        for _ in 0..200 {
            let av = self.apply(&v);
            let mut atav = vec![0.0; self.cols];
            for (k, a) in av.iter().enumerate() {
                for (i, w) in atav.iter_mut().enumerate() {
                    *w += self.get(k, i) * a;
                }
            }
            let n = l2_norm(&atav);
            if n == 0.0 {
                return 0.0;
            }
            let next = n.sqrt();
            v = atav.into_iter().map(|x| x / n).collect();
            if (next - sigma).abs() <= 1e-14 * next {
                return next;
            }
            sigma = next;
        }
        sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen12() -> DiagonalGenerator {
        DiagonalGenerator::explicit(vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn semigroup_at_zero_is_identity() {
        let g = DiagonalGenerator::laplacian_shifted(5).unwrap();
        let x: SpectralVector = vec![1.0, -2.0, 3.0, 0.5, 0.25].into();
        assert_eq!(g.apply_semigroup(0.0, &x).unwrap(), x);
    }

    #[test]
    fn semigroup_two_modes() {
        let y = gen12().apply_semigroup(1.0, &vec![1.0, 1.0].into()).unwrap();
        assert!((y[0] - 0.367879441171).abs() < 1e-11);
        assert!((y[1] - 0.135335283237).abs() < 1e-11);
    }

    #[test]
    fn semigroup_law() {
        let g = DiagonalGenerator::laplacian_shifted(8).unwrap();
        let x: SpectralVector = (0..8).map(|k| (k as f64).sin() + 0.3).collect();
        let a = g.apply_semigroup(0.3, &g.apply_semigroup(0.7, &x).unwrap()).unwrap();
        let b = g.apply_semigroup(1.0, &x).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            assert!((u - v).abs() <= 1e-15 * v.abs().max(1e-300) * 4.0);
        }
    }

    #[test]
    fn negative_time_rejected() {
        assert!(gen12().apply_semigroup(-0.1, &vec![1.0, 1.0].into()).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(matches!(
            gen12().apply_semigroup(0.1, &vec![1.0].into()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fractional_norm_examples() {
        let g = DiagonalGenerator::explicit(vec![1.0, 4.0]).unwrap();
        assert_eq!(g.fractional_norm(0.0, &[3.0, 4.0]), 5.0);
        assert!((g.fractional_norm(0.5, &[1.0, 1.0]) - 5f64.sqrt()).abs() < 1e-15);
        assert!((g.fractional_norm(-0.5, &[0.0, 2.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fractional_power_examples() {
        let g = DiagonalGenerator::explicit(vec![4.0]).unwrap();
        let x: SpectralVector = vec![1.0].into();
        assert_eq!(g.apply_fractional_power(0.5, &x).unwrap()[0], 2.0);
        assert_eq!(g.apply_fractional_power(0.0, &x).unwrap(), x);
    }

    #[test]
    fn invalid_generators_rejected() {
        assert!(DiagonalGenerator::explicit(vec![]).is_err());
        assert!(DiagonalGenerator::explicit(vec![1.0, -1.0]).is_err());
        assert!(DiagonalGenerator::explicit(vec![2.0, 1.0]).is_err());
        assert!(DiagonalGenerator::laplacian_shifted(0).is_err());
    }

    #[test]
    fn default_generator_has_unit_gap() {
        let g = DiagonalGenerator::laplacian_shifted(4).unwrap();
        assert_eq!(g.mu(), &[1.0, 2.0, 5.0, 10.0]);
        assert_eq!(g.nu(), 1.0);
    }

    #[test]
    fn generator_spec_round_trips_through_toml() {
        let spec: GeneratorSpec = toml::from_str("kind = \"laplacian_shifted\"\nn_modes = 16").unwrap();
        assert_eq!(spec, GeneratorSpec::LaplacianShifted { n_modes: 16 });
        let spec: GeneratorSpec = toml::from_str("kind = \"explicit\"\nmu = [1.0, 3.0]").unwrap();
        assert_eq!(DiagonalGenerator::from_spec(&spec).unwrap().mu(), &[1.0, 3.0]);
    }

    #[test]
    fn operator_norm_of_rank_one() {
        let op = SpectralOperator::rank_one(&[3.0, 4.0], &[0.6, 0.8]);
        assert!((op.operator_norm() - 5.0).abs() < 1e-12);
        assert!((op.frobenius_norm() - 5.0).abs() < 1e-12);
        let h = op.apply(&[0.6, 0.8]);
        assert!((h[0] - 3.0).abs() < 1e-15 && (h[1] - 4.0).abs() < 1e-15);
    }
}
