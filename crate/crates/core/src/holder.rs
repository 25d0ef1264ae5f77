//! Hölder-type seminorms of sampled paths, their `L^p(Ω)` ensemble versions
//! and log–log rate fitting.
//!
//! Pairwise suprema run over every grid pair `s < t` when the grid has at
//! most [`ALL_PAIRS_MAX`] points and over the dyadic lags `t − s = 2^j·dt`
//! otherwise. [`PairScan`] records which one was used.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path::{write_meta, SampledPath};
use crate::spectral::{l2_norm, Identity, Propagator};

pub const ALL_PAIRS_MAX: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairScan {
    All,
    Dyadic,
}

impl PairScan {
    pub fn for_points(n_points: usize) -> Self {
        if n_points <= ALL_PAIRS_MAX {
            PairScan::All
        } else {
            PairScan::Dyadic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PairScan::All => "all_pairs",
            PairScan::Dyadic => "dyadic_lags",
        }
    }

    /// Index lags `t − s` scanned on a grid with `n_points` points.
    pub fn lags(self, n_points: usize) -> Vec<usize> {
        let max = n_points.saturating_sub(1);
        match self {
            PairScan::All => (1..=max).collect(),
            PairScan::Dyadic => {
                let mut v: Vec<usize> = std::iter::successors(Some(1usize), |l| l.checked_mul(2))
                    .take_while(|l| *l <= max)
                    .collect();
                if v.last() != Some(&max) && max > 0 {
                    v.push(max);
                }
                v
            }
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

fn check_nonempty(path: &SampledPath) -> Result<()> {
    if path.dim() == 0 {
        return Err(Error::Empty("path"));
    }
    Ok(())
}

/// `max_{s<t} ‖δ̂f_{s,t}‖ / (t−s)^γ` with `δ̂f_{s,t} = f_t − S_{t−s} f_s`.
pub fn mild_holder_norm<P: Propagator + ?Sized>(prop: &P, path: &SampledPath, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_nonempty(path)?;
    let dt = path.grid().dt();
    let dim = path.dim();
    let v = path.values();
    let lags = PairScan::for_points(v.len()).lags(v.len());
    Ok(lags
        .par_iter()
        .map(|&lag| {
            let fac = prop.factors(lag as f64 * dt, dim);
            let w = (lag as f64 * dt).powf(-gamma);
            (0..v.len() - lag)
                .map(|i| mild_diff_norm(&v[i + lag], &v[i], &fac) * w)
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

#[inline]
fn mild_diff_norm(late: &[f64], early: &[f64], fac: &[f64]) -> f64 {
    late.iter()
        .zip(early)
        .zip(fac)
        .map(|((a, b), f)| {
            let d = a - f * b;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Classical `max_{s<t} ‖f_t − f_s‖ / (t−s)^γ`.
pub fn holder_norm(path: &SampledPath, gamma: f64) -> Result<f64> {
    mild_holder_norm(&Identity, path, gamma)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Trapezoid primitive `r ↦ ∫_0^r G` on the grid of `path`.
pub fn trapezoid_primitive(path: &SampledPath) -> SampledPath {
    let dt = path.grid().dt();
    let v = path.values();
    let mut acc = vec![0.0; path.dim()];
    let mut out = Vec::with_capacity(v.len());
    out.push(acc.clone().into());
    for w in v.windows(2) {
        for ((a, x), y) in acc.iter_mut().zip(w[0].iter()).zip(w[1].iter()) {
            *a += 0.5 * dt * (x + y);
        }
        out.push(acc.clone().into());
    }
    SampledPath::new(*path.grid(), out).expect("same grid")
}

/// `sup_{s<t} (t−s)^{δ−1} ‖∫_s^t G(r) dr‖`, integrals by cumulative trapezoid
/// sums on the grid of `path`.
pub fn neg_holder_norm(path: &SampledPath, delta: f64) -> Result<f64> {
    check_nonempty(path)?;
    neg_holder_norm_from_primitive(&trapezoid_primitive(path), delta)
}

/// Same seminorm from a precomputed primitive `P(r) = ∫_0^r G`, sampled on a
/// possibly coarser grid than `G` itself.
pub fn neg_holder_norm_from_primitive(primitive: &SampledPath, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_nonempty(primitive)?;
    let dt = primitive.grid().dt();
    let v = primitive.values();
    let lags = PairScan::for_points(v.len()).lags(v.len());
    Ok(lags
        .par_iter()
        .map(|&lag| {
            let w = (lag as f64 * dt).powf(delta - 1.0);
            (0..v.len() - lag)
                .map(|i| diff_norm(&v[i + lag], &v[i]) * w)
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// Scalar shortcut of [`neg_holder_norm_from_primitive`].
pub fn neg_holder_norm_scalar_primitive(primitive: &[f64], dt: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if primitive.is_empty() {
        return Err(Error::Empty("primitive"));
    }
    let n = primitive.len();
    let lags = PairScan::for_points(n).lags(n);
    Ok(lags
        .iter()
        .map(|&lag| {
            let w = (lag as f64 * dt).powf(delta - 1.0);
            primitive
                .windows(lag + 1)
                .map(|p| (p[lag] - p[0]).abs() * w)
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

#[inline]
fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Replica paths with their seeds and the moment orders to report.
#[derive(Debug, Clone)]
pub struct Ensemble {
    replicas: Vec<SampledPath>,
    seeds: Vec<u64>,
    p_values: Vec<f64>,
}

impl Ensemble {
    pub fn new(replicas: Vec<SampledPath>, seeds: Vec<u64>, p_values: Vec<f64>) -> Result<Self> {
        if replicas.is_empty() {
            return Err(Error::Empty("ensemble"));
        }
        if seeds.len() != replicas.len() {
            return Err(Error::DimensionMismatch {
                context: "Ensemble seeds",
                expected: replicas.len(),
                got: seeds.len(),
            });
        }
        if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            return Err(Error::param("seeds", "replica seeds must be distinct"));
        }
        if let Some(p) = p_values.iter().find(|p| !(**p >= 1.0)) {
            return Err(Error::param("p", format!("moment orders must be >= 1, got {p}")));
        }
        let first = &replicas[0];
        if replicas
            .iter()
            .any(|r| r.grid() != first.grid() || r.dim() != first.dim())
        {
            return Err(Error::param("replicas", "all replicas must share grid and dimension"));
        }
        Ok(Self {
            replicas,
            seeds,
            p_values,
        })
    }

    pub fn replicas(&self) -> &[SampledPath] {
        &self.replicas
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }
}

/// `sup_{s<t} (E‖δ̂Z_{s,t}‖^p)^{1/p} / (t−s)^α` with the expectation replaced
/// by the ensemble mean.
pub fn b_alpha_p_norm<P: Propagator + ?Sized>(prop: &P, ens: &Ensemble, alpha: f64, p: f64) -> Result<f64> {
    check_gamma(alpha)?;
    if !(p >= 1.0) {
        return Err(Error::param("p", format!("must be >= 1, got {p}")));
    }
    let first = &ens.replicas[0];
    let dt = first.grid().dt();
    let dim = first.dim();
    let n = first.len();
    let m = ens.len() as f64;
    let lags = PairScan::for_points(n).lags(n);
    Ok(lags
        .par_iter()
        .map(|&lag| {
            let fac = prop.factors(lag as f64 * dt, dim);
            let w = (lag as f64 * dt).powf(-alpha);
            (0..n - lag)
                .map(|i| {
                    let mean = ens
                        .replicas
                        .iter()
                        .map(|r| mild_diff_norm(r.at(i + lag), r.at(i), &fac).powf(p))
                        .sum::<f64>()
                        / m;
                    mean.powf(1.0 / p) * w
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// `(mean |v|^p)^{1/p}`.
pub fn lp_mean(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64).powf(1.0 / p)
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            context: "fit_rate",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::NotEnoughPoints {
            needed: 3,
            got: xs.len(),
        });
    }
    for (i, v) in xs.iter().chain(ys).enumerate() {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositive {
                index: i % xs.len(),
                value: *v,
            });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_linear(&lx, &ly)
}

/// Ordinary least squares on raw `(x, y)`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(Error::NotEnoughPoints { needed: 3, got: n.min(ys.len()) });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("xs", "all abscissae coincide"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let r_squared = if ss_res <= 1e-24 * scale {
        1.0
    } else if ss_tot == 0.0 {
        0.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

/// One row of a norm report.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub norm_kind: String,
    pub gamma_or_delta: f64,
    pub p: Option<f64>,
    pub value: f64,
    pub n_grid: usize,
    pub n_replicas: usize,
}

/// Norm report CSV: `norm_kind,gamma_or_delta,p,value,n_grid,n_replicas`.
pub fn write_norm_report<W: Write>(mut w: W, rows: &[NormRow], meta: &[(&str, String)]) -> Result<()> {
    write_meta(&mut w, meta)?;
    if let Some(r) = rows.first() {
        writeln!(w, "# pair_scan={}", PairScan::for_points(r.n_grid).name())?;
    }
    writeln!(w, "norm_kind,gamma_or_delta,p,value,n_grid,n_replicas")?;
    for r in rows {
        let p = r.p.map_or(String::new(), |p| p.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.norm_kind, r.gamma_or_delta, p, r.value, r.n_grid, r.n_replicas
        )?;
    }
    Ok(())
}

/// `‖v‖` helper shared with callers that hold raw slices.
pub fn norm(v: &[f64]) -> f64 {
    l2_norm(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::spectral::{DiagonalGenerator, SpectralVector};

    fn scalar(grid: TimeGrid, f: impl Fn(f64) -> f64) -> SampledPath {
        SampledPath::from_fn(grid, |t| SpectralVector::new(vec![f(t)])).unwrap()
    }

    #[test]
    fn semigroup_orbit_has_zero_mild_norm() {
        let gen = DiagonalGenerator::explicit(vec![1.0]).unwrap();
        let grid = TimeGrid::uniform(1.0, 100).unwrap();
        let p = scalar(grid, |t| (-t).exp());
        assert!(mild_holder_norm(&gen, &p, 0.5).unwrap() < 1e-14);
    }

    #[test]
    fn mild_norm_linear_path_brute_force() {
        let gen = DiagonalGenerator::explicit(vec![1.0]).unwrap();
        let grid = TimeGrid::uniform(1.0, 40).unwrap();
        let p = scalar(grid, |t| t);
        let mut best: f64 = 0.0;
        for i in 0..=40 {
            for j in i + 1..=40 {
                let (s, t) = (i as f64 / 40.0, j as f64 / 40.0);
                best = best.max((t - (-(t - s)).exp() * s).abs() / (t - s));
            }
        }
        assert!((mild_holder_norm(&gen, &p, 1.0).unwrap() - best).abs() < 1e-14);
    }

    #[test]
    fn classical_holder_examples() {
        let grid = TimeGrid::uniform(2.0, 50).unwrap();
        assert!((holder_norm(&scalar(grid, |t| t), 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(holder_norm(&scalar(grid, |_| 0.0), 0.5).unwrap(), 0.0);
        assert!(holder_norm(&scalar(grid, |t| t), 0.0).is_err());
        assert!(holder_norm(&scalar(grid, |t| t), 1.5).is_err());
    }

    #[test]
    fn neg_holder_constant_attains_full_interval() {
        let grid = TimeGrid::uniform(2.0, 64).unwrap();
        let c = 1.7;
        let v = neg_holder_norm(&scalar(grid, |_| c), 0.3).unwrap();
        assert!((v - 2f64.powf(0.3) * c).abs() < 1e-12);
        assert_eq!(neg_holder_norm(&scalar(grid, |_| 0.0), 0.3).unwrap(), 0.0);
        assert!(neg_holder_norm(&scalar(grid, |_| 0.0), 1.0).is_err());
    }

    #[test]
    fn dyadic_lags_beyond_threshold() {
        assert_eq!(PairScan::for_points(2048), PairScan::All);
        assert_eq!(PairScan::for_points(2049), PairScan::Dyadic);
        assert_eq!(PairScan::Dyadic.lags(10), vec![1, 2, 4, 8, 9]);
    }

    #[test]
    fn rate_fit_examples() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let f = fit_rate(&xs, &xs.map(|x| x * x)).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.r_squared == 1.0);
        let f = fit_rate(&xs, &[3.0; 4]).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(fit_rate(&xs, &[1.0, -1.0, 1.0, 1.0]).is_err());
        assert!(fit_rate(&xs[..2], &xs[..2]).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.9) - 3.7).abs() < 1e-12);
        assert!((lp_mean(&[3.0, 4.0], 2.0) - 12.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ensemble_rejects_duplicate_seeds() {
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let p = scalar(grid, |t| t);
        assert!(Ensemble::new(vec![p.clone(), p.clone()], vec![1, 1], vec![2.0]).is_err());
        assert!(Ensemble::new(vec![], vec![], vec![2.0]).is_err());
        assert!(Ensemble::new(vec![p.clone(), p], vec![1, 2], vec![2.0]).is_ok());
    }
}
