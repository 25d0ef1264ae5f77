//! One runner per experiment kind. Runners write their CSVs through an
//! [`OutputSet`] and return named metrics that the `[assert]` block can bound.

use std::path::PathBuf;

use crate::coefficients::StationaryLaw;
use crate::error::{Error, Result};
use crate::experiment::config::{Bound, ExperimentConfig, ExperimentKind, FunctionalKind};
use crate::experiment::output::{OutputSet, VERSION};
use crate::experiment::studies::{
    apriori_study, default_x0, fbm_covariance_study, mild_young_rate_study, mixed_vs_young_study,
    sewing_decay_study, variogram_study, young_study,
};
use crate::fbm::{sample_fbm, QSpec, QfbmSampler};
use crate::grid::TimeGrid;
use crate::holder::median;
use crate::rng::{derive_seed, stream};
use crate::slowfast::{
    ergodic_deviation, run_averaging_experiment, wiener_counterexample, AveragingConfig, CounterexampleIntegrand,
    ErgodicConfig, ErgodicFunctional,
};
use crate::solver::{solve_mild, SolveConfig};
use crate::spectral::DiagonalGenerator;

/// Metrics each kind reports; `[assert]` keys must come from this list.
pub fn metric_names(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Fbm => &["max_cov_error", "max_cov_error_over_stderr", "variogram_slope_error"],
        ExperimentKind::Young => &[
            "trapezoid_rel_error",
            "left_point_rel_error",
            "constant_max_error",
            "mixed_max_rel_error",
        ],
        ExperimentKind::Sewing => &["rate_slope", "rate_r_squared", "mean_level_ratio"],
        ExperimentKind::Solve => &[
            "sup_norm",
            "richardson_error",
            "apriori_slope",
            "apriori_r_squared",
        ],
        ExperimentKind::Ergodic => &["slope", "r_squared", "lipschitz_slope"],
        ExperimentKind::Average => &[
            "shrink_ratio",
            "monotone",
            "first_median",
            "last_median",
            "counterexample_ratio",
        ],
        ExperimentKind::Counterexample => &["estimate", "abs_error", "max_z"],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub metric: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub metrics: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub artifacts: Vec<PathBuf>,
    /// An earlier run with the same config hash wrote to the same directory.
    pub rerun: bool,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("experiment {} (config {})\n", self.kind, self.config_hash);
        if self.rerun {
            s.push_str("  re-run of an identical config in this directory\n");
        }
        for (n, v) in &self.metrics {
            s.push_str(&format!("  {n} = {v}\n"));
        }
        for note in &self.notes {
            s.push_str(&format!("  note: {note}\n"));
        }
        for c in &self.checks {
            s.push_str(&format!(
                "  assert {}: {} in [{}, {}] -> {}\n",
                c.metric,
                c.value,
                c.bound.min.map_or("-inf".into(), |v| v.to_string()),
                c.bound.max.map_or("inf".into(), |v| v.to_string()),
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

#[derive(Default)]
struct Collected {
    metrics: Vec<(String, f64)>,
    notes: Vec<String>,
}

impl Collected {
    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.push((name.to_string(), v));
    }
}

/// Runs the experiment described by `cfg`, writing artifacts under
/// `cfg.output.dir`. On error every file written by this run is removed.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let known = metric_names(kind);
    if let Some(bad) = cfg.assertions.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Config {
            path: format!("assert.{bad}"),
            reason: format!("unknown metric for {kind}; available: {}", known.join(", ")),
        });
    }
    let hash = cfg.hash();
    let header = vec![
        ("mildsew_version", VERSION.to_string()),
        ("config_hash", hash.clone()),
        ("experiment", kind.to_string()),
        ("seed", cfg.mc.seed.to_string()),
    ];
    let mut out = OutputSet::create(&cfg.output.dir, header)?;
    let rerun = out.previous_hash() == Some(hash.as_str());
    let mut col = Collected::default();
    let result = match kind {
        ExperimentKind::Fbm => run_fbm(cfg, &mut out, &mut col),
        ExperimentKind::Young => run_young(cfg, &mut out, &mut col),
        ExperimentKind::Sewing => run_sewing(cfg, &mut out, &mut col),
        ExperimentKind::Solve => run_solve(cfg, &mut out, &mut col),
        ExperimentKind::Ergodic => run_ergodic(cfg, &mut out, &mut col),
        ExperimentKind::Average => run_average(cfg, &mut out, &mut col),
        ExperimentKind::Counterexample => run_counterexample(cfg, &mut out, &mut col),
    }
    .and_then(|()| {
        let checks = checks(cfg, &col.metrics);
        write_summary(&mut out, &col.metrics, &checks)?;
        Ok(checks)
    });
    match result {
        Ok(checks) => {
            let artifacts = out.finish()?;
            Ok(RunReport {
                kind,
                config_hash: hash,
                metrics: col.metrics,
                checks,
                notes: col.notes,
                artifacts,
                rerun,
            })
        }
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn checks(cfg: &ExperimentConfig, metrics: &[(String, f64)]) -> Vec<Check> {
    cfg.assertions
        .iter()
        .map(|(name, bound)| {
            let value = metrics
                .iter()
                .find(|(n, _)| n == name)
                .map_or(f64::NAN, |(_, v)| *v);
            Check {
                metric: name.clone(),
                value,
                bound: *bound,
                pass: bound.holds(value),
            }
        })
        .collect()
}

fn write_summary(out: &mut OutputSet, metrics: &[(String, f64)], checks: &[Check]) -> Result<()> {
    out.write("summary.csv", &[], |w| {
        writeln!(w, "metric,value,min,max,pass")?;
        for (n, v) in metrics {
            match checks.iter().find(|c| &c.metric == n) {
                Some(c) => writeln!(
                    w,
                    "{n},{v},{},{},{}",
                    opt(c.bound.min),
                    opt(c.bound.max),
                    c.pass
                )?,
                None => writeln!(w, "{n},{v},,,")?,
            }
        }
        for c in checks.iter().filter(|c| !metrics.iter().any(|(n, _)| n == &c.metric)) {
            writeln!(w, "{},NaN,{},{},false", c.metric, opt(c.bound.min), opt(c.bound.max))?;
        }
        Ok(())
    })?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn generator(cfg: &ExperimentConfig) -> Result<DiagonalGenerator> {
    DiagonalGenerator::from_spec(&cfg.generator)
}

fn run_fbm(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let hursts = cfg.model.hurst_list.clone().unwrap_or_else(|| vec![cfg.model.hurst]);
    let seed = derive_seed(cfg.mc.seed, stream::DRIVER);
    let mut cov = Vec::new();
    let mut vario = Vec::new();
    for (i, &h) in hursts.iter().enumerate() {
        let hs = derive_seed(seed, i as u64);
        cov.push(fbm_covariance_study(
            h,
            cfg.grid.horizon,
            cfg.grid.steps,
            cfg.model.subgrid,
            cfg.mc.replicas,
            hs,
        )?);
        vario.push(variogram_study(h, cfg.grid.steps, cfg.mc.replicas.min(1000), derive_seed(hs, 1))?);
    }
    out.write("fbm_covariance.csv", &[], |w| {
        writeln!(w, "hurst,s,t,empirical,exact,abs_error,stderr")?;
        for c in &cov {
            for r in &c.rows {
                writeln!(w, "{},{},{},{},{},{},{}", c.hurst, r.s, r.t, r.empirical, r.exact, r.abs_error(), r.stderr)?;
            }
        }
        Ok(())
    })?;
    out.write("fbm_variogram.csv", &[], |w| {
        writeln!(w, "hurst,lag,mean_sq_increment")?;
        for v in &vario {
            for (l, m) in v.lags.iter().zip(&v.mean_sq) {
                writeln!(w, "{},{},{}", v.hurst, l, m)?;
            }
        }
        Ok(())
    })?;
    let grid = TimeGrid::uniform(cfg.grid.horizon, cfg.grid.steps)?;
    let path = sample_fbm(hursts[0], &grid, derive_seed(seed, 0))?;
    out.write(
        "fbm_path.csv",
        &[("H", hursts[0].to_string()), ("dt", grid.dt().to_string())],
        |w| path.write_csv(w, &[]),
    )?;
    col.metric("max_cov_error", cov.iter().map(|c| c.max_abs_error).fold(0.0, f64::max));
    col.metric(
        "max_cov_error_over_stderr",
        cov.iter().map(|c| c.max_abs_error / c.max_stderr).fold(0.0, f64::max),
    );
    col.metric(
        "variogram_slope_error",
        vario.iter().map(|v| (v.fit.slope - 2.0 * v.hurst).abs()).fold(0.0, f64::max),
    );
    Ok(())
}

fn run_young(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let seed = derive_seed(cfg.mc.seed, stream::DRIVER);
    let y = young_study(cfg.model.hurst, cfg.grid.levels, seed)?;
    out.write("young.csv", &[("H", cfg.model.hurst.to_string())], |w| {
        writeln!(w, "scheme,value,exact,rel_error")?;
        writeln!(w, "trapezoid,{},{},{}", y.trapezoid.value[0], y.exact, y.trapezoid_rel_error())?;
        writeln!(w, "left_point,{},{},{}", y.left_point.value[0], y.exact, y.left_point_rel_error())?;
        Ok(())
    })?;
    out.write("young_telemetry.csv", &[("germ", "young_trapezoid".into())], |w| {
        y.trapezoid.write_telemetry(w, &[])
    })?;
    col.metric("trapezoid_rel_error", y.trapezoid_rel_error());
    col.metric("left_point_rel_error", y.left_point_rel_error());
    col.metric("constant_max_error", y.constant_max_error);
    if cfg.model.mixed_drivers > 0 {
        let gen = generator(cfg)?;
        let q = QSpec::from_config(&cfg.q)?;
        let cmp = mixed_vs_young_study(
            &gen,
            &q,
            cfg.model.hurst,
            cfg.model.base_time,
            cfg.model.mixed_levels,
            cfg.model.mixed_drivers,
            cfg.mc.seed,
        )?;
        out.write("young_mixed.csv", &[], |w| {
            writeln!(w, "driver,young_norm,mixed_norm,rel_error")?;
            for (i, c) in cmp.iter().enumerate() {
                writeln!(w, "{i},{},{},{}", c.young.norm(), c.mixed.norm(), c.rel_error())?;
            }
            Ok(())
        })?;
        col.metric(
            "mixed_max_rel_error",
            cmp.iter().map(|c| c.rel_error()).fold(0.0, f64::max),
        );
    }
    Ok(())
}

fn run_sewing(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let gen = generator(cfg)?;
    let m = &cfg.model;
    let rate = mild_young_rate_study(
        &gen,
        m.alpha.max(m.hurst),
        m.hurst,
        cfg.grid.levels,
        m.sizes,
        16,
        m.rate_replicas,
        derive_seed(cfg.mc.seed, stream::AUX),
    )?;
    out.write("sewing_rate.csv", &[], |w| {
        writeln!(w, "interval,defect")?;
        for (s, d) in rate.sizes.iter().zip(&rate.defects) {
            writeln!(w, "{s},{d}")?;
        }
        Ok(())
    })?;
    out.write("sewing_telemetry.csv", &[("germ", "mild_young".into())], |w| {
        rate.telemetry.write_telemetry(w, &[])
    })?;
    col.metric("rate_slope", rate.fit.slope);
    col.metric("rate_r_squared", rate.fit.r_squared);

    let q = QSpec::from_config(&cfg.q)?;
    let pair = cfg.coefficients.build(&gen, q.m_modes())?;
    let frozen = pair.frozen(m.y);
    let decay = sewing_decay_study(&gen, &frozen, &q, m.hurst, cfg.grid.levels, cfg.mc.replicas, cfg.mc.seed)?;
    let ratios = decay.ratios();
    out.write("sewing_decay.csv", &[], |w| {
        writeln!(w, "level,l2_diff,ratio")?;
        for (i, d) in decay.level_l2.iter().enumerate() {
            let r = if i == 0 { String::new() } else { ratios[i - 1].to_string() };
            writeln!(w, "{},{d},{r}", i + 1)?;
        }
        Ok(())
    })?;
    let hi = (cfg.grid.levels as usize).saturating_sub(2).clamp(1, 10);
    let lo = 4.min(hi);
    col.metric("mean_level_ratio", decay.mean_ratio(lo, hi));
    col.notes.push(format!("mean_level_ratio averages levels {lo}..={hi}"));
    Ok(())
}

fn run_solve(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let gen = generator(cfg)?;
    let q = QSpec::from_config(&cfg.q)?;
    let pair = cfg.coefficients.build(&gen, q.m_modes())?;
    let frozen = pair.frozen(cfg.model.y);
    let grid = TimeGrid::uniform(cfg.grid.horizon, cfg.grid.steps)?;
    let driver_seed = derive_seed(cfg.mc.seed, stream::DRIVER);
    let h = QfbmSampler::new(q.clone(), cfg.model.hurst, grid)?.sample(driver_seed);
    let mut scfg = SolveConfig::new(default_x0(gen.n_modes()));
    scfg.richardson = cfg.grid.steps.is_multiple_of(2);
    let sol = solve_mild(&gen, &frozen, &h, &scfg)?;
    let rich = sol.richardson_error.unwrap_or(f64::NAN);
    let meta = [
        ("dt", grid.dt().to_string()),
        ("scheme", "exp_euler".to_string()),
        ("H", cfg.model.hurst.to_string()),
        ("driver_seed", driver_seed.to_string()),
        ("richardson_error", rich.to_string()),
    ];
    out.write("solution.csv", &meta, |w| sol.path.write_csv(w, &[]))?;
    col.metric("sup_norm", sol.path.sup_norm());
    col.metric("richardson_error", rich);

    let ap = apriori_study(
        &gen,
        &frozen,
        &q,
        cfg.model.hurst,
        cfg.grid.steps,
        &cfg.model.scales,
        cfg.model.gamma,
        cfg.mc.seed,
    )?;
    out.write("apriori.csv", &[("gamma", cfg.model.gamma.to_string())], |w| {
        writeln!(w, "scale,driver_norm,solution_norm")?;
        for r in &ap.rows {
            writeln!(w, "{},{},{}", r.scale, r.driver_norm, r.solution_norm)?;
        }
        Ok(())
    })?;
    col.metric("apriori_slope", ap.fit.slope);
    col.metric("apriori_r_squared", ap.fit.r_squared);
    Ok(())
}

fn fast_law(cfg: &ExperimentConfig) -> Result<StationaryLaw> {
    cfg.fast.gaussian_law().ok_or_else(|| Error::Config {
        path: "fast.kind".into(),
        reason: "this experiment needs a fast process with a Gaussian stationary law".into(),
    })
}

fn run_ergodic(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let gen = generator(cfg)?;
    let q = QSpec::from_config(&cfg.q)?;
    let pair = cfg.coefficients.build(&gen, q.m_modes())?;
    let law = fast_law(cfg)?;
    let x0 = default_x0(gen.n_modes());
    let func = match cfg.model.functional {
        FunctionalKind::Bare => ErgodicFunctional::bare(pair.m_g, &law)?,
        FunctionalKind::Pair => ErgodicFunctional::diffusion_at(&pair, &law, &x0)?,
    };
    let p = cfg.mc.p.first().copied().unwrap_or(2.0);
    let ecfg = ErgodicConfig {
        epsilons: cfg.epsilons_or(&[0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125]),
        horizon: cfg.grid.horizon,
        norm_steps: cfg.grid.steps,
        delta: cfg.model.delta,
        p,
        replicas: cfg.mc.replicas,
        seed: cfg.mc.seed,
    };
    let rep = ergodic_deviation(&func, &cfg.fast, &ecfg)?;
    let z: Vec<f64> = x0.iter().map(|v| -v).collect();
    let lip = ErgodicFunctional::diffusion_lipschitz(&pair, &law, &x0, &z)?;
    let lip_rep = ergodic_deviation(&lip, &cfg.fast, &ErgodicConfig {
        seed: derive_seed(cfg.mc.seed, 1),
        ..ecfg.clone()
    })?;
    out.write("ergodic.csv", &[("delta", ecfg.delta.to_string()), ("p", p.to_string())], |w| {
        writeln!(w, "epsilon,replica,deviation")?;
        for (e, s) in rep.epsilons.iter().zip(&rep.samples) {
            for (r, v) in s.iter().enumerate() {
                writeln!(w, "{e},{r},{v}")?;
            }
        }
        Ok(())
    })?;
    out.write("ergodic_summary.csv", &[("delta", ecfg.delta.to_string()), ("p", p.to_string())], |w| {
        writeln!(w, "epsilon,lp_mean,lipschitz_lp_mean,n")?;
        for i in 0..rep.epsilons.len() {
            writeln!(w, "{},{},{},{}", rep.epsilons[i], rep.values[i], lip_rep.values[i], ecfg.replicas)?;
        }
        Ok(())
    })?;
    col.metric("slope", rep.fit.slope);
    col.metric("r_squared", rep.fit.r_squared);
    col.metric("lipschitz_slope", lip_rep.fit.slope);
    Ok(())
}

fn run_average(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let gen = generator(cfg)?;
    let q = QSpec::from_config(&cfg.q)?;
    let pair = cfg.coefficients.build(&gen, q.m_modes())?;
    let acfg = AveragingConfig {
        epsilons: cfg.epsilons_or(&[0.2, 0.1, 0.05, 0.025]),
        horizon: cfg.grid.horizon,
        slow_steps: cfg.grid.steps,
        alpha: cfg.model.alpha,
        hurst: cfg.model.hurst,
        n_modes: gen.n_modes(),
        q: cfg.q.clone(),
        replicas: cfg.mc.replicas,
        p: cfg.mc.p.first().copied().unwrap_or(2.0),
        seed: cfg.mc.seed,
        x0: None,
        hermite_order: 16,
    };
    let rep = run_averaging_experiment(&acfg, &cfg.fast, &pair)?;
    out.write("averaging.csv", &[("alpha", acfg.alpha.to_string())], |w| {
        writeln!(w, "epsilon,replica,distance")?;
        for row in &rep.rows {
            for (r, d) in row.distances.iter().enumerate() {
                writeln!(w, "{},{r},{d}", row.epsilon)?;
            }
        }
        Ok(())
    })?;
    out.write("averaging_summary.csv", &[("alpha", acfg.alpha.to_string())], |w| {
        writeln!(w, "epsilon,median,q90,n")?;
        for row in &rep.rows {
            writeln!(w, "{},{},{},{}", row.epsilon, row.median, row.q90, row.distances.len())?;
        }
        Ok(())
    })?;
    let med = rep.medians();
    let first = med[0];
    let last = *med.last().expect("nonempty");
    col.metric("first_median", first);
    col.metric("last_median", last);
    col.metric("shrink_ratio", last / first);
    col.metric("monotone", if med.windows(2).all(|w| w[1] < w[0]) { 1.0 } else { 0.0 });

    if cfg.model.counterexample_replicas > 0 {
        let eps = [acfg.epsilons[0], *acfg.epsilons.last().expect("nonempty")];
        let est: Vec<f64> = eps
            .iter()
            .map(|&e| {
                wiener_counterexample(
                    e,
                    cfg.model.t,
                    cfg.model.counterexample_replicas,
                    1000,
                    cfg.mc.seed,
                    CounterexampleIntegrand::Cos,
                )
                .map(|r| r.estimate)
            })
            .collect::<Result<_>>()?;
        col.metric("counterexample_ratio", est[1] / est[0]);
        col.notes.push(format!(
            "Wiener counterexample at eps {} and {}: {} and {}",
            eps[0], eps[1], est[0], est[1]
        ));
    }
    Ok(())
}

fn run_counterexample(cfg: &ExperimentConfig, out: &mut OutputSet, col: &mut Collected) -> Result<()> {
    let eps = cfg.epsilons_or(&[0.1]);
    let reps: Vec<_> = eps
        .iter()
        .map(|&e| {
            wiener_counterexample(
                e,
                cfg.model.t,
                cfg.mc.replicas,
                cfg.grid.steps,
                cfg.mc.seed,
                CounterexampleIntegrand::Cos,
            )
        })
        .collect::<Result<_>>()?;
    out.write("counterexample.csv", &[("steps", cfg.grid.steps.to_string())], |w| {
        writeln!(w, "eps,t,estimate,stderr,expected")?;
        for r in &reps {
            writeln!(w, "{},{},{},{},{}", r.eps, r.t, r.estimate, r.stderr, r.expected)?;
        }
        Ok(())
    })?;
    let worst = reps
        .iter()
        .max_by(|a, b| (a.estimate - a.expected).abs().total_cmp(&(b.estimate - b.expected).abs()))
        .expect("nonempty");
    col.metric("estimate", median(&reps.iter().map(|r| r.estimate).collect::<Vec<_>>()));
    col.metric("abs_error", (worst.estimate - worst.expected).abs());
    col.metric(
        "max_z",
        reps.iter()
            .map(|r| (r.estimate - r.expected).abs() / r.stderr)
            .fold(0.0, f64::max),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_lists_metrics() {
        for k in ExperimentKind::ALL {
            assert!(!metric_names(k).is_empty());
        }
    }

    #[test]
    fn unknown_assert_metric_is_rejected_before_running() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Counterexample);
        cfg.assertions.insert("nope".into(), Bound::default());
        cfg.output.dir = std::env::temp_dir().join(format!("mildsew-never-{}", std::process::id()));
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "assert.nope"));
        assert!(!cfg.output.dir.exists());
    }
}
