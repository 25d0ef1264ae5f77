use super::{sew, Germ, SewingResult};
use crate::error::{Error, Result};
use crate::path::{OperatorPath, QfbmPath, SampledPath, ScalarPath};
use crate::spectral::{Identity, Propagator, SpectralVector};

type GermFn = dyn Fn(usize, usize) -> SpectralVector + Send + Sync;

/// Germ given by a closure on grid-index pairs.
pub struct FnGerm {
    name: String,
    dim: usize,
    dt: f64,
    f: Box<GermFn>,
}

impl FnGerm {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        dt: f64,
        f: impl Fn(usize, usize) -> SpectralVector + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            dt,
            f: Box::new(f),
        }
    }
}

impl Germ for FnGerm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn eval(&self, s: usize, t: usize) -> SpectralVector {
        (self.f)(s, t)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Local approximation used by the Young germ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YoungScheme {
    /// `f(u)·(h_v − h_u)`
    #[default]
    LeftPoint,
    /// `½(f(u) + f(v))·(h_v − h_u)`; same limit, and exact for `∫ h dh` at
    /// every level.
    Trapezoid,
}

/// `Ξ_{u,v} = f(u)·(h_v − h_u)` (or its trapezoid variant).
pub struct YoungGerm<'a> {
    f: &'a SampledPath,
    h: &'a [f64],
    scheme: YoungScheme,
}

impl<'a> YoungGerm<'a> {
    pub fn new(f: &'a SampledPath, h: &'a ScalarPath, scheme: YoungScheme) -> Result<Self> {
        if f.grid() != h.grid() {
            return Err(Error::param("h", "integrand and integrator must share a grid"));
        }
        Ok(Self {
            f,
            h: h.values(),
            scheme,
        })
    }
}

impl Germ for YoungGerm<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn dt(&self) -> f64 {
        self.f.grid().dt()
    }

    fn eval(&self, s: usize, t: usize) -> SpectralVector {
        let dh = self.h[t] - self.h[s];
        match self.scheme {
            YoungScheme::LeftPoint => self.f.at(s) * dh,
            YoungScheme::Trapezoid => &(self.f.at(s) + self.f.at(t)) * (0.5 * dh),
        }
    }

    fn name(&self) -> &str {
        match self.scheme {
            YoungScheme::LeftPoint => "young_left_point",
            YoungScheme::Trapezoid => "young_trapezoid",
        }
    }
}

/// `∫_s^t f dh` by dyadic sewing of the left-point germ.
pub fn young_integral(f: &SampledPath, h: &ScalarPath, s: usize, t: usize, levels: u32) -> Result<SewingResult> {
    young_integral_with(f, h, s, t, levels, YoungScheme::LeftPoint)
}

pub fn young_integral_with(
    f: &SampledPath,
    h: &ScalarPath,
    s: usize,
    t: usize,
    levels: u32,
    scheme: YoungScheme,
) -> Result<SewingResult> {
    let germ = YoungGerm::new(f, h, scheme)?;
    sew(&Identity, &germ, s, t, levels)
}

/// `Ξ_{u,v} = S_{v−u} f(u) (h_v − h_u)` with operator-valued `f`.
pub struct MildYoungGerm<'a, P: Propagator + ?Sized> {
    prop: &'a P,
    f: &'a OperatorPath,
    h: &'a QfbmPath,
}

impl<'a, P: Propagator + ?Sized> MildYoungGerm<'a, P> {
    pub fn new(prop: &'a P, f: &'a OperatorPath, h: &'a QfbmPath) -> Result<Self> {
        if f.cols() != h.m_modes() {
            return Err(Error::DimensionMismatch {
                context: "mild Young germ: operator columns vs noise modes",
                expected: f.cols(),
                got: h.m_modes(),
            });
        }
        if f.grid() != h.grid() {
            return Err(Error::param("h", "integrand and integrator must share a grid"));
        }
        Ok(Self { prop, f, h })
    }
}

impl<P: Propagator + ?Sized> Germ for MildYoungGerm<'_, P> {
    fn dim(&self) -> usize {
        self.f.rows()
    }

    fn dt(&self) -> f64 {
        self.f.grid().dt()
    }

    fn eval(&self, s: usize, t: usize) -> SpectralVector {
        let dh = self.h.increment(s, t);
        let mut x = self.f.at(s).apply(&dh);
        self.prop.propagate((t - s) as f64 * self.dt(), &mut x);
        x
    }

    fn name(&self) -> &str {
        "mild_young"
    }
}

/// `∫_s^t S_{t−r} f(r) dh_r` by dyadic mild sewing.
pub fn mild_young_integral<P: Propagator + ?Sized>(
    prop: &P,
    f: &OperatorPath,
    h: &QfbmPath,
    s: usize,
    t: usize,
    levels: u32,
) -> Result<SewingResult> {
    let germ = MildYoungGerm::new(prop, f, h)?;
    sew(prop, &germ, s, t, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::sample_fbm;
    use crate::grid::TimeGrid;
    use crate::spectral::{DiagonalGenerator, SpectralOperator};

    #[test]
    fn unit_integrand_telescopes_at_every_level() {
        let grid = TimeGrid::uniform(1.0, 256).unwrap();
        let h = sample_fbm(0.75, &grid, 3).unwrap();
        let one = SampledPath::from_fn(grid, |_| SpectralVector::new(vec![1.0])).unwrap();
        let exact = h.values()[256] - h.values()[0];
        for levels in 1..=8 {
            let r = young_integral(&one, &h, 0, 256, levels).unwrap();
            assert!((r.value[0] - exact).abs() <= 1e-14 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn trapezoid_self_integral_exact() {
        let grid = TimeGrid::uniform(1.0, 1024).unwrap();
        let h = sample_fbm(0.75, &grid, 5).unwrap();
        let f = SampledPath::from_scalar(&h);
        let r = young_integral_with(&f, &h, 0, 1024, 10, YoungScheme::Trapezoid).unwrap();
        let v = h.values();
        let exact = 0.5 * (v[1024] * v[1024] - v[0] * v[0]);
        assert!((r.value[0] - exact).abs() < 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn linear_integrator_gives_riemann_integral() {
        let grid = TimeGrid::uniform(1.0, 1024).unwrap();
        let h = ScalarPath::from_fn(grid, |t| t);
        let f = SampledPath::from_fn(grid, |t| SpectralVector::new(vec![t.sin()])).unwrap();
        let r = young_integral(&f, &h, 0, 1024, 10).unwrap();
        let exact = 1.0 - 1f64.cos();
        assert!((r.value[0] - exact).abs() < 1.0 / 1024.0);
    }

    #[test]
    fn mild_young_constant_integrand_linear_driver() {
        let gen = DiagonalGenerator::explicit(vec![1.0]).unwrap();
        let grid = TimeGrid::uniform(1.0, 4096).unwrap();
        let h = QfbmPath::from(ScalarPath::from_fn(grid, |t| t));
        let c = 1.5;
        let f = OperatorPath::constant(grid, SpectralOperator::rank_one(&[c], &[1.0]));
        let r = mild_young_integral(&gen, &f, &h, 0, 4096, 12).unwrap();
        let exact = (1.0 - (-1f64).exp()) * c;
        assert!((r.value[0] - exact).abs() < 1e-3, "{} vs {exact}", r.value[0]);
        let zero = QfbmPath::from(ScalarPath::from_fn(grid, |_| 0.0));
        assert_eq!(mild_young_integral(&gen, &f, &zero, 0, 4096, 4).unwrap().value[0], 0.0);
    }

    #[test]
    fn mild_young_dimension_checks() {
        let gen = DiagonalGenerator::explicit(vec![1.0]).unwrap();
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let h = QfbmPath::new(grid, vec![vec![0.0, 0.0]; 9]).unwrap();
        let f = OperatorPath::constant(grid, SpectralOperator::rank_one(&[1.0], &[1.0]));
        assert!(mild_young_integral(&gen, &f, &h, 0, 8, 3).is_err());
    }
}
