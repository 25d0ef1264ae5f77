//! Mixed Wiener–Young integral over a window `[s, t]`.
//!
//! Each noise mode is split at `s` into its rough and smooth parts. The rough
//! part is integrated by left-point sums against its increments; the smooth
//! part is differentiable for `h > 0`: on each cell the integrand is frozen at
//! the left point against the exact increment of `β̄`, and the remainder
//! `(φ(r) − φ(r_k))·∂_h β̄` is integrated by two-point Gauss–Legendre. The
//! remainder vanishes at the left point, which tames the `h^{H−1}` singularity
//! of the derivative on the first cell.

use crate::error::{Error, Result};
use crate::fbm::{MvnNoise, QSpec};
use crate::grid::TimeGrid;
use crate::path::{OperatorPath, QfbmPath};
use crate::spectral::{Propagator, SpectralVector};

const GL2: f64 = 0.288_675_134_594_812_9; // 1/(2√3)

/// Operator-valued integrand on the window grid: index `k` is time `s + k·dt`.
pub type MixedIntegrand = OperatorPath;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegral {
    pub value: SpectralVector,
    pub rough: SpectralVector,
    pub smooth: SpectralVector,
}

fn check_noises(g: &OperatorPath, noises: &[MvnNoise], q: &QSpec) -> Result<()> {
    if noises.is_empty() {
        return Err(Error::Empty("noise history"));
    }
    if noises.len() != q.m_modes() || g.cols() != q.m_modes() {
        return Err(Error::DimensionMismatch {
            context: "mixed integral noise modes",
            expected: q.m_modes(),
            got: noises.len().min(g.cols()),
        });
    }
    let first = &noises[0];
    let steps = g.grid().steps();
    for n in noises {
        if n.hurst() != first.hurst() || n.base_time() != first.base_time() {
            return Err(Error::param("noises", "all modes must share H and base time"));
        }
        if (n.fine_step() - g.grid().dt()).abs() > 1e-12 * n.fine_step() {
            return Err(Error::param("noises", "window step must equal the integrand grid step"));
        }
        if n.window_steps() < steps {
            return Err(Error::param("noises", "noise window shorter than the integrand"));
        }
    }
    Ok(())
}

/// `Σ_n √λ_n ∫_s^t S_{t−r} g(r) e_n dβ^n_r` over the window of `g`.
///
/// With the identity propagator this is the plain integral `∫ g dB`.
pub fn mixed_wiener_young_integral<P: Propagator + ?Sized>(
    prop: &P,
    g: &MixedIntegrand,
    noises: &[MvnNoise],
    q: &QSpec,
) -> Result<MixedIntegral> {
    check_noises(g, noises, q)?;
    let dt = g.grid().dt();
    let steps = g.grid().steps();
    let horizon = steps as f64 * dt;
    let dim = g.rows();
    let mut rough = vec![0.0; dim];
    let mut smooth = vec![0.0; dim];
    let transported = |r: f64, x: &mut [f64]| prop.propagate((horizon - r).max(0.0), x);

    for (n, (noise, lam)) in noises.iter().zip(q.lambda()).enumerate() {
        let scale = lam.sqrt();
        let column = g.column_path(n);
        let rough_path = noise.rough_path(steps)?;
        let mut prev_rough = 0.0;
        let mut prev_smooth = 0.0;
        for k in 0..steps {
            let r0 = k as f64 * dt;
            let next_rough = rough_path[k + 1];
            let mut x = column.at(k).clone();
            transported(r0, &mut x);
            add_scaled(&mut rough, &x, scale * (next_rough - prev_rough));
            prev_rough = next_rough;

            // ∫ φ dβ̄ = φ(r_k)·Δβ̄ + ∫ (φ(r) − φ(r_k)) ∂β̄ dr, φ(r) = S_{t−r}g(r)e_n
            let next_smooth = noise.smooth(r0 + dt)?;
            let mut base = column.at(k).clone();
            transported(r0, &mut base);
            add_scaled(&mut smooth, &base, scale * (next_smooth - prev_smooth));
            prev_smooth = next_smooth;
            for theta in [0.5 - GL2, 0.5 + GL2] {
                let r = r0 + theta * dt;
                let mut x: SpectralVector = column
                    .at(k)
                    .iter()
                    .zip(column.at(k + 1).iter())
                    .map(|(a, b)| (1.0 - theta) * a + theta * b)
                    .collect();
                transported(r, &mut x);
                x -= &base;
                if x.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let d = noise.smooth_derivative(r, 1)?;
                add_scaled(&mut smooth, &x, scale * 0.5 * dt * d);
            }
        }
    }
    let value: SpectralVector = rough.iter().zip(&smooth).map(|(a, b)| a + b).collect();
    Ok(MixedIntegral {
        value,
        rough: rough.into(),
        smooth: smooth.into(),
    })
}

fn add_scaled(acc: &mut [f64], x: &[f64], c: f64) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += c * b;
    }
}

/// Window path `B_{s+h} − B_s` on the fine grid, built from the same noise.
pub fn driver_from_noise(noises: &[MvnNoise], q: &QSpec, steps: usize) -> Result<QfbmPath> {
    if noises.len() != q.m_modes() {
        return Err(Error::DimensionMismatch {
            context: "driver_from_noise",
            expected: q.m_modes(),
            got: noises.len(),
        });
    }
    let dt = noises[0].fine_step();
    let mut values = vec![vec![0.0; q.m_modes()]; steps + 1];
    for (n, (noise, lam)) in noises.iter().zip(q.lambda()).enumerate() {
        let path = noise.increment_path(steps)?;
        for (row, v) in values.iter_mut().zip(path) {
            row[n] = lam.sqrt() * v;
        }
    }
    QfbmPath::new(TimeGrid::new(dt, steps)?, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::MvnConfig;
    use crate::rng::derive_seed;
    use crate::spectral::{Identity, SpectralOperator};

    fn noises(hurst: f64, m: usize, dt: f64, steps: usize, seed: u64) -> Vec<MvnNoise> {
        (0..m)
            .map(|n| {
                MvnNoise::sample(hurst, 0.3, steps as f64 * dt, &MvnConfig::new(dt), derive_seed(seed, n as u64))
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn brownian_case_is_left_point_sum() {
        let q = QSpec::explicit(vec![1.0]).unwrap();
        let grid = TimeGrid::uniform(0.5, 50).unwrap();
        let ns = noises(0.5, 1, 0.01, 50, 7);
        let g = OperatorPath::from_state_path(
            &crate::path::SampledPath::from_fn(grid, |t| SpectralVector::new(vec![t.cos()])).unwrap(),
            &[1.0],
        );
        let out = mixed_wiener_young_integral(&Identity, &g, &ns, &q).unwrap();
        assert_eq!(out.smooth[0], 0.0);
        let b = driver_from_noise(&ns, &q, 50).unwrap();
        let lp: f64 = (0..50).map(|k| (k as f64 * 0.01).cos() * (b.at(k + 1)[0] - b.at(k)[0])).sum();
        assert!((out.value[0] - lp).abs() < 1e-12);
    }

    #[test]
    fn constant_integrand_telescopes() {
        let q = QSpec::power_law(1.5, 3).unwrap();
        let steps = 64;
        let dt = 1.0 / 64.0;
        let grid = TimeGrid::new(dt, steps).unwrap();
        let ns = noises(0.75, 3, dt, steps, 2);
        let op = SpectralOperator::from_row_major(2, 3, vec![1.0, 0.5, -0.2, 0.0, 1.0, 2.0]).unwrap();
        let g = OperatorPath::constant(grid, op.clone());
        let out = mixed_wiener_young_integral(&Identity, &g, &ns, &q).unwrap();
        let b = driver_from_noise(&ns, &q, steps).unwrap();
        let exact = op.apply(b.at(steps));
        for (a, e) in out.value.iter().zip(exact.iter()) {
            assert!((a - e).abs() < 1e-12 * e.abs().max(1.0), "{a} vs {e}");
        }
    }

    #[test]
    fn rejects_missing_history() {
        let q = QSpec::explicit(vec![1.0, 0.5]).unwrap();
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let g = OperatorPath::constant(grid, SpectralOperator::zeros(1, 2));
        assert!(mixed_wiener_young_integral(&Identity, &g, &[], &q).is_err());
    }
}
