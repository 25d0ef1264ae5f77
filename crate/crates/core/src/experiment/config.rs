//! TOML experiment configs.
//!
//! A config is a set of flat blocks; every block has defaults, so a file only
//! lists what it changes:
//!
//! ```toml
//! experiment = "average"
//!
//! [generator]
//! kind = "laplacian_shifted"
//! n_modes = 16
//!
//! [q]
//! q_exponent = 1.5
//! m_modes = 8
//!
//! [fast]
//! kind = "ou"
//! fine_step = 0.01
//!
//! [grid]
//! horizon = 1.0
//! steps = 8
//!
//! [mc]
//! replicas = 200
//! seed = 7
//!
//! [model]
//! alpha = 0.55
//! epsilons = [0.2, 0.1, 0.05, 0.025]
//!
//! [assert]
//! shrink_ratio = { max = 0.3333333333333333 }
//! ```
//!
//! The field reference lives in `docs/config.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::CoefficientConfig;
use crate::error::{Error, Result};
use crate::fbm::QSpecConfig;
use crate::slowfast::FastSpec;
use crate::spectral::GeneratorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fbm,
    Young,
    Sewing,
    Solve,
    Ergodic,
    Average,
    Counterexample,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Fbm,
        ExperimentKind::Young,
        ExperimentKind::Sewing,
        ExperimentKind::Solve,
        ExperimentKind::Ergodic,
        ExperimentKind::Average,
        ExperimentKind::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fbm => "fbm",
            ExperimentKind::Young => "young",
            ExperimentKind::Sewing => "sewing",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Ergodic => "ergodic",
            ExperimentKind::Average => "average",
            ExperimentKind::Counterexample => "counterexample",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config {
                path: "experiment".into(),
                reason: format!("unknown experiment `{s}`"),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Dyadic sewing levels.
    #[serde(default = "default_levels")]
    pub levels: u32,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            steps: default_steps(),
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Master seed; every random draw derives from it.
    #[serde(default)]
    pub seed: u64,
}

impl Default for McBlock {
    fn default() -> Self {
        Self {
            replicas: default_replicas(),
            p: default_p(),
            seed: 0,
        }
    }
}

/// Model and estimator parameters shared by the experiment kinds. Fields a
/// kind does not use are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default = "default_hurst")]
    pub hurst: f64,
    /// Hurst sweep of the `fbm` experiment; defaults to `[hurst]`.
    #[serde(default)]
    pub hurst_list: Option<Vec<f64>>,
    /// Hölder order of the distance in `average` and of the integrand in
    /// `sewing`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Hölder order of solution norms.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    /// Evaluation time of the counterexample.
    #[serde(default = "one")]
    pub t: f64,
    /// Driver scales of the a-priori sweep in `solve`.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    /// Fast state at which `solve` freezes the coefficients.
    #[serde(default)]
    pub y: f64,
    /// Side of the covariance lattice in `fbm`.
    #[serde(default = "default_subgrid")]
    pub subgrid: usize,
    /// Number of interval sizes in the `sewing` rate fit.
    #[serde(default = "default_sizes")]
    pub sizes: u32,
    /// Path pairs averaged in the `sewing` rate fit.
    #[serde(default = "default_rate_replicas")]
    pub rate_replicas: usize,
    /// Independent drivers of the mixed-vs-Young comparison in `young`
    /// (0 skips it).
    #[serde(default)]
    pub mixed_drivers: usize,
    /// Dyadic levels of the mixed-vs-Young comparison.
    #[serde(default = "default_mixed_levels")]
    pub mixed_levels: u32,
    /// Base time `s` of the mixed-vs-Young window.
    #[serde(default = "half")]
    pub base_time: f64,
    /// `"bare"` uses `m_g` alone, `"pair"` scales by `‖g_base(x0)‖`.
    #[serde(default)]
    pub functional: FunctionalKind,
    /// Counterexample replicas run next to `average` (0 skips them).
    #[serde(default)]
    pub counterexample_replicas: usize,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            hurst: default_hurst(),
            hurst_list: None,
            alpha: default_alpha(),
            gamma: default_gamma(),
            delta: default_delta(),
            epsilons: None,
            t: 1.0,
            scales: default_scales(),
            y: 0.0,
            subgrid: default_subgrid(),
            sizes: default_sizes(),
            rate_replicas: default_rate_replicas(),
            mixed_drivers: 0,
            mixed_levels: default_mixed_levels(),
            base_time: 0.5,
            functional: FunctionalKind::Bare,
            counterexample_replicas: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    #[default]
    Bare,
    Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

/// Bounds on one reported metric; both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        v.is_finite() && self.min.is_none_or(|m| v >= m) && self.max.is_none_or(|m| v <= m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required by `run`; the named subcommands fill it in.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default = "default_generator")]
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub q: QSpecConfig,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default = "default_fast")]
    pub fast: FastSpec,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, rename = "assert")]
    pub assertions: BTreeMap<String, Bound>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            generator: default_generator(),
            q: QSpecConfig::default(),
            coefficients: CoefficientConfig::default(),
            fast: default_fast(),
            grid: GridBlock::default(),
            mc: McBlock::default(),
            model: ModelBlock::default(),
            output: OutputBlock::default(),
            assertions: BTreeMap::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_kind(kind: ExperimentKind) -> Self {
        Self {
            experiment: Some(kind),
            ..Self::default()
        }
    }

    /// Parses and validates; errors name the offending field path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| Error::Config {
            path: "<document>".into(),
            reason: e.to_string(),
        })?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            reason: e.inner().message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment.ok_or_else(|| Error::Config {
            path: "experiment".into(),
            reason: "missing; one of fbm, young, sewing, solve, ergodic, average, counterexample".into(),
        })
    }

    /// Canonical TOML of the resolved config (defaults filled in).
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config blocks serialize")
    }

    /// First 16 hex digits of the SHA-256 of the canonical form, with the
    /// output directory left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputBlock::default();
        let digest = Sha256::digest(c.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, reason: &str| {
            Err(Error::Config {
                path: path.into(),
                reason: reason.into(),
            })
        };
        if !(self.grid.horizon > 0.0) {
            return bad("grid.horizon", "must be positive");
        }
        if self.grid.steps == 0 {
            return bad("grid.steps", "must be positive");
        }
        if self.grid.levels == 0 || self.grid.levels > 24 {
            return bad("grid.levels", "must lie in 1..=24");
        }
        if self.mc.replicas == 0 {
            return bad("mc.replicas", "must be positive");
        }
        if self.mc.p.iter().any(|p| !(*p >= 1.0)) {
            return bad("mc.p", "entries must be >= 1");
        }
        let hursts = std::iter::once(self.model.hurst).chain(self.model.hurst_list.iter().flatten().copied());
        for h in hursts {
            if !(h > 0.0 && h < 1.0) {
                return bad("model.hurst", "must lie in (0, 1)");
            }
        }
        if let Some(e) = &self.model.epsilons {
            if e.is_empty() || e.iter().any(|v| !(*v > 0.0)) {
                return bad("model.epsilons", "must be a nonempty list of positive values");
            }
        }
        if !(self.model.t > 0.0) {
            return bad("model.t", "must be positive");
        }
        if self.model.scales.iter().any(|c| !(*c > 0.0)) {
            return bad("model.scales", "must be positive");
        }
        if !(self.model.delta > 0.0 && self.model.delta < 1.0) {
            return bad("model.delta", "must lie in (0, 1)");
        }
        for (name, b) in &self.assertions {
            if let (Some(lo), Some(hi)) = (b.min, b.max) {
                if lo > hi {
                    return Err(Error::Config {
                        path: format!("assert.{name}"),
                        reason: "min exceeds max".into(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn epsilons_or(&self, default: &[f64]) -> Vec<f64> {
        self.model.epsilons.clone().unwrap_or_else(|| default.to_vec())
    }
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn default_steps() -> usize {
    512
}

fn default_levels() -> u32 {
    12
}

fn default_replicas() -> usize {
    200
}

fn default_p() -> Vec<f64> {
    vec![2.0]
}

fn default_hurst() -> f64 {
    0.75
}

fn default_alpha() -> f64 {
    0.55
}

fn default_gamma() -> f64 {
    0.5
}

fn default_delta() -> f64 {
    0.3
}

fn default_scales() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

fn default_subgrid() -> usize {
    16
}

fn default_sizes() -> u32 {
    6
}

fn default_rate_replicas() -> usize {
    32
}

fn default_mixed_levels() -> u32 {
    12
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_generator() -> GeneratorSpec {
    GeneratorSpec::LaplacianShifted { n_modes: 16 }
}

fn default_fast() -> FastSpec {
    FastSpec::ou(0.01)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert!(cfg.kind().is_err());
    }

    #[test]
    fn field_paths_in_errors() {
        let err = ExperimentConfig::from_toml("[mc]\nreplicas = \"many\"\n").unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "mc.replicas"),
            e => panic!("unexpected {e}"),
        }
        let err = ExperimentConfig::from_toml("[grid]\nstepz = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path.starts_with("grid")), "{err}");
        let err = ExperimentConfig::from_toml("[model]\nhurst = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "model.hurst"));
    }

    #[test]
    fn blocks_round_trip() {
        let text = r#"
experiment = "average"
[generator]
kind = "explicit"
mu = [1.0, 2.0]
[q]
lambda = [1.0, 0.5]
[fast]
kind = "frac_ou"
hurst = 0.7
fine_step = 0.005
[assert]
shrink_ratio = { max = 0.5 }
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.kind().unwrap(), ExperimentKind::Average);
        let back = ExperimentConfig::from_toml(&cfg.canonical()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 16);
        assert!(cfg.assertions["shrink_ratio"].holds(0.4));
        assert!(!cfg.assertions["shrink_ratio"].holds(0.6));
    }

    #[test]
    fn hash_tracks_seed_not_output_dir() {
        let mut a = ExperimentConfig::for_kind(ExperimentKind::Fbm);
        let h = a.hash();
        a.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), h);
        a.mc.seed = 1;
        assert_ne!(a.hash(), h);
    }
}
