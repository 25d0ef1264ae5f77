//! Grid-indexed paths: scalar paths, noise-space paths, state paths and
//! operator-valued paths.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::spectral::{SpectralOperator, SpectralVector};

fn check_len(context: &'static str, grid: &TimeGrid, got: usize) -> Result<()> {
    if grid.len() != got {
        return Err(Error::DimensionMismatch {
            context,
            expected: grid.len(),
            got,
        });
    }
    Ok(())
}

/// Writes `# key=value` metadata lines.
pub fn write_meta<W: Write>(w: &mut W, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Real-valued path on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ScalarPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        check_len("ScalarPath", &grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.times().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(&str, String)]) -> Result<()> {
        write_meta(&mut w, meta)?;
        writeln!(w, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.time(k), v)?;
        }
        Ok(())
    }
}

/// Path in the noise space `K`, stored as coordinates in the eigenbasis of
/// the covariance `Q`. This is the driver type for all integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct QfbmPath {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
}

impl QfbmPath {
    pub fn new(grid: TimeGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        check_len("QfbmPath", &grid, values.len())?;
        let m = values.first().map_or(0, Vec::len);
        if let Some(bad) = values.iter().find(|v| v.len() != m) {
            return Err(Error::DimensionMismatch {
                context: "QfbmPath coordinates",
                expected: m,
                got: bad.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn m_modes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    #[inline]
    pub fn at(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// `h_{t_j} − h_{t_i}`
    pub fn increment(&self, i: usize, j: usize) -> Vec<f64> {
        self.values[j]
            .iter()
            .zip(&self.values[i])
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Coordinate `n` as a scalar path.
    pub fn coordinate(&self, n: usize) -> ScalarPath {
        ScalarPath {
            grid: self.grid,
            values: self.values.iter().map(|v| v[n]).collect(),
        }
    }

    /// `c·h`
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|x| c * x).collect())
                .collect(),
        }
    }

    /// Keeps the first `steps` cells and freezes the path afterwards.
    pub fn frozen_after(&self, steps: usize) -> Self {
        let k = steps.min(self.grid.steps());
        let last = self.values[k].clone();
        let mut values = self.values.clone();
        values[k..].iter_mut().for_each(|v| v.clone_from(&last));
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Every `stride`-th grid point.
    pub fn coarsened(&self, stride: usize) -> Result<Self> {
        let grid = self.grid.coarsened(stride)?;
        Ok(Self {
            grid,
            values: self.values.iter().step_by(stride).cloned().collect(),
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(&str, String)]) -> Result<()> {
        write_meta(&mut w, meta)?;
        let cols: Vec<String> = (0..self.m_modes()).map(|n| format!("b{n}")).collect();
        writeln!(w, "t,{}", cols.join(","))?;
        for (k, v) in self.values.iter().enumerate() {
            let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{}", self.grid.time(k), row.join(","))?;
        }
        Ok(())
    }
}

impl From<ScalarPath> for QfbmPath {
    fn from(p: ScalarPath) -> Self {
        Self {
            grid: p.grid,
            values: p.values.into_iter().map(|v| vec![v]).collect(),
        }
    }
}

/// State-valued path `f : [0,T] → H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: TimeGrid,
    values: Vec<SpectralVector>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, values: Vec<SpectralVector>) -> Result<Self> {
        check_len("SampledPath", &grid, values.len())?;
        let n = values.first().map_or(0, |v| v.len());
        if let Some(bad) = values.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "SampledPath coordinates",
                expected: n,
                got: bad.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> SpectralVector) -> Result<Self> {
        let values = grid.times().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn from_scalar(p: &ScalarPath) -> Self {
        Self {
            grid: p.grid,
            values: p.values.iter().map(|v| SpectralVector::new(vec![*v])).collect(),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn values(&self) -> &[SpectralVector] {
        &self.values
    }

    #[inline]
    pub fn at(&self, k: usize) -> &SpectralVector {
        &self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise difference `self − other`.
    pub fn difference(&self, other: &SampledPath) -> Result<SampledPath> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch {
                context: "SampledPath::difference",
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(SampledPath {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Restriction to the first `steps` cells.
    pub fn truncated(&self, steps: usize) -> SampledPath {
        let grid = self.grid.truncated(steps);
        SampledPath {
            grid,
            values: self.values[..grid.len()].to_vec(),
        }
    }

    /// Every `stride`-th grid point.
    pub fn coarsened(&self, stride: usize) -> Result<SampledPath> {
        let grid = self.grid.coarsened(stride)?;
        Ok(SampledPath {
            grid,
            values: self.values.iter().step_by(stride).cloned().collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(&str, String)]) -> Result<()> {
        write_meta(&mut w, meta)?;
        let cols: Vec<String> = (0..self.dim()).map(|k| format!("x{k}")).collect();
        writeln!(w, "t,{}", cols.join(","))?;
        for (k, v) in self.values.iter().enumerate() {
            let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{}", self.grid.time(k), row.join(","))?;
        }
        Ok(())
    }
}

/// Operator-valued path `f : [0,T] → L(K, H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPath {
    grid: TimeGrid,
    values: Vec<SpectralOperator>,
}

impl OperatorPath {
    pub fn new(grid: TimeGrid, values: Vec<SpectralOperator>) -> Result<Self> {
        check_len("OperatorPath", &grid, values.len())?;
        if let Some(first) = values.first() {
            let (r, c) = (first.rows(), first.cols());
            if let Some(bad) = values.iter().find(|v| v.rows() != r || v.cols() != c) {
                return Err(Error::DimensionMismatch {
                    context: "OperatorPath shapes",
                    expected: r * c,
                    got: bad.rows() * bad.cols(),
                });
            }
        }
        Ok(Self { grid, values })
    }

    /// `f(t) = v(t) ⊗ w` for a fixed noise direction `w`.
    pub fn from_state_path(path: &SampledPath, direction: &[f64]) -> Self {
        Self {
            grid: path.grid,
            values: path
                .values
                .iter()
                .map(|v| SpectralOperator::rank_one(v, direction))
                .collect(),
        }
    }

    pub fn constant(grid: TimeGrid, op: SpectralOperator) -> Self {
        Self {
            grid,
            values: vec![op; grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[SpectralOperator] {
        &self.values
    }

    #[inline]
    pub fn at(&self, k: usize) -> &SpectralOperator {
        &self.values[k]
    }

    pub fn rows(&self) -> usize {
        self.values.first().map_or(0, SpectralOperator::rows)
    }

    pub fn cols(&self) -> usize {
        self.values.first().map_or(0, SpectralOperator::cols)
    }

    /// `f(t)·e_n`: the state path of column `n`.
    pub fn column_path(&self, n: usize) -> SampledPath {
        SampledPath {
            grid: self.grid,
            values: self.values.iter().map(|op| op.column(n)).collect(),
        }
    }
}
