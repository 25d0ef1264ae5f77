//! Dyadic mild sewing.
//!
//! For a germ `Ξ` on grid pairs the engine evaluates the semigroup-weighted
//! Riemann sums
//!
//! ```text
//! Ξ^{D_n}_{s,t} = Σ_{[u,v] ∈ D_n} S_{t−v} Ξ_{u,v}
//! ```
//!
//! over the dyadic partitions `D_n` of `[s, t]`, `n = 0..=levels`, and keeps
//! the Cauchy differences `‖Ξ^{D_{n+1}} − Ξ^{D_n}‖` as telemetry. With the
//! identity propagator this is plain (Young) sewing.

mod germ;
mod mixed;

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path::write_meta;
use crate::spectral::{l2_norm, Propagator, SpectralVector};

pub use germ::{
    mild_young_integral, young_integral, young_integral_with, FnGerm, MildYoungGerm, YoungGerm,
    YoungScheme,
};
pub use mixed::{driver_from_noise, mixed_wiener_young_integral, MixedIntegral, MixedIntegrand};

/// Default number of dyadic levels (4096 subintervals).
pub const DEFAULT_LEVELS: u32 = 12;

/// Two-parameter field `(s, t) ↦ Ξ_{s,t}` on pairs of grid indices `s ≤ t`.
///
/// Evaluators must be pure: the engine may call them concurrently and in any
/// order.
pub trait Germ: Sync {
    fn dim(&self) -> usize;
    /// Step of the underlying time grid.
    fn dt(&self) -> f64;
    fn eval(&self, s: usize, t: usize) -> SpectralVector;
    fn name(&self) -> &str {
        "germ"
    }
}

/// `Ξ_{r,t} − Ξ_{s,t} − S_{t−s} Ξ_{r,s}`.
pub fn sewing_defect<P, G>(prop: &P, germ: &G, r: usize, s: usize, t: usize) -> Result<SpectralVector>
where
    P: Propagator + ?Sized,
    G: Germ + ?Sized,
{
    if !(r <= s && s <= t) {
        return Err(Error::OutOfOrder(format!("need r <= s <= t, got ({r}, {s}, {t})")));
    }
    let mut inner = germ.eval(r, s);
    prop.propagate((t - s) as f64 * germ.dt(), &mut inner);
    let mut d = germ.eval(r, t);
    d -= &germ.eval(s, t);
    d -= &inner;
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SewingResult {
    /// Riemann sum at the finest level.
    pub value: SpectralVector,
    /// `‖Ξ^{D_{n+1}} − Ξ^{D_n}‖` for `n = 0..levels`.
    pub level_diffs: Vec<f64>,
    /// `‖Ξ^{D_n}‖` for `n = 0..=levels`.
    pub level_norms: Vec<f64>,
    pub levels: u32,
}

impl SewingResult {
    /// Last Cauchy difference, used as the error proxy of `value`.
    pub fn error_proxy(&self) -> f64 {
        self.level_diffs.last().copied().unwrap_or(0.0)
    }

    /// Telemetry CSV: `level,diff_norm,value_norm`, where row `n` compares
    /// levels `n` and `n−1`.
    pub fn write_telemetry<W: Write>(&self, mut w: W, meta: &[(&str, String)]) -> Result<()> {
        write_meta(&mut w, meta)?;
        writeln!(w, "level,diff_norm,value_norm")?;
        for (n, d) in self.level_diffs.iter().enumerate() {
            writeln!(w, "{},{},{}", n + 1, d, self.level_norms[n + 1])?;
        }
        Ok(())
    }
}

const CHUNK: usize = 64;

/// `Σ_i S_{t−p_{i+1}} Ξ_{p_i, p_{i+1}}` over an arbitrary partition
/// `p_0 < p_1 < … < p_k = t` of grid indices.
///
/// Chunks are summed in a fixed order, so the result does not depend on the
/// number of worker threads.
pub fn riemann_sum<P, G>(prop: &P, germ: &G, partition: &[usize]) -> Result<SpectralVector>
where
    P: Propagator + ?Sized,
    G: Germ + ?Sized,
{
    if partition.is_empty() {
        return Err(Error::Empty("partition"));
    }
    if partition.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::OutOfOrder("partition must be strictly increasing".into()));
    }
    let dim = germ.dim();
    let t = *partition.last().unwrap();
    let dt = germ.dt();
    let cells: Vec<(usize, usize)> = partition.windows(2).map(|w| (w[0], w[1])).collect();
    let partial: Vec<Vec<f64>> = cells
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; dim];
            for &(u, v) in chunk {
                let mut x = germ.eval(u, v);
                prop.propagate((t - v) as f64 * dt, &mut x);
                for (a, b) in acc.iter_mut().zip(x.iter()) {
                    *a += b;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim];
    for p in partial {
        for (a, b) in total.iter_mut().zip(&p) {
            *a += b;
        }
    }
    Ok(total.into())
}

/// Dyadic partition of `[s, t]` into `2^level` cells.
pub fn dyadic_partition(s: usize, t: usize, level: u32) -> Result<Vec<usize>> {
    let n = 1usize << level;
    if !(t - s).is_multiple_of(n) {
        return Err(Error::GridTooCoarse { s, t, levels: level });
    }
    let step = (t - s) / n;
    Ok((0..=n).map(|i| s + i * step).collect())
}

/// Sews `germ` on `[s, t]` (grid indices) through `levels` dyadic levels.
pub fn sew<P, G>(prop: &P, germ: &G, s: usize, t: usize, levels: u32) -> Result<SewingResult>
where
    P: Propagator + ?Sized,
    G: Germ + ?Sized,
{
    if levels == 0 {
        return Err(Error::param("levels", "need at least one dyadic level"));
    }
    if s > t {
        return Err(Error::OutOfOrder(format!("sew needs s <= t, got ({s}, {t})")));
    }
    if levels >= usize::BITS {
        return Err(Error::GridTooCoarse { s, t, levels });
    }
    if s == t {
        return Ok(SewingResult {
            value: SpectralVector::zeros(germ.dim()),
            level_diffs: vec![0.0; levels as usize],
            level_norms: vec![0.0; levels as usize + 1],
            levels,
        });
    }
    if !(t - s).is_multiple_of(1usize << levels) {
        return Err(Error::GridTooCoarse { s, t, levels });
    }
    let mut level_diffs = Vec::with_capacity(levels as usize);
    let mut level_norms = Vec::with_capacity(levels as usize + 1);
    let mut prev = riemann_sum(prop, germ, &[s, t])?;
    level_norms.push(prev.norm());
    for n in 1..=levels {
        let cur = riemann_sum(prop, germ, &dyadic_partition(s, t, n)?)?;
        level_diffs.push(l2_norm(&(&cur - &prev)));
        level_norms.push(cur.norm());
        prev = cur;
    }
    Ok(SewingResult {
        value: prev,
        level_diffs,
        level_norms,
        levels,
    })
}

/// Difference between the finest dyadic sum and a uniform, non-dyadic
/// partition of `cells` cells. Partition independence makes this small.
pub fn partition_spot_check<P, G>(prop: &P, germ: &G, s: usize, t: usize, levels: u32, cells: usize) -> Result<f64>
where
    P: Propagator + ?Sized,
    G: Germ + ?Sized,
{
    if cells == 0 || !(t - s).is_multiple_of(cells) {
        return Err(Error::param("cells", "must divide the interval length"));
    }
    let dyadic = sew(prop, germ, s, t, levels)?;
    let step = (t - s) / cells;
    let part: Vec<usize> = (0..=cells).map(|i| s + i * step).collect();
    let other = riemann_sum(prop, germ, &part)?;
    Ok(l2_norm(&(&dyadic.value - &other)))
}
