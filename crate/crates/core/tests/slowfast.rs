use mildsew::coefficients::{CoefficientConfig, Modulation, StationaryLaw};
use mildsew::fbm::QSpecConfig;
use mildsew::holder::mean_stderr;
use mildsew::slowfast::{
    counterexample_constant, ergodic_deviation, run_averaging_experiment, wiener_counterexample, AveragingConfig,
    CounterexampleIntegrand, ErgodicConfig, ErgodicFunctional, FastSpec,
};
use mildsew::DiagonalGenerator;

fn averaging_cfg(replicas: usize) -> AveragingConfig {
    AveragingConfig {
        epsilons: vec![0.2, 0.1, 0.05],
        horizon: 1.0,
        slow_steps: 8,
        alpha: 0.55,
        hurst: 0.75,
        n_modes: 8,
        q: QSpecConfig::PowerLaw { q_exponent: 1.5, m_modes: 4 },
        replicas,
        p: 2.0,
        seed: 17,
        x0: None,
        hermite_order: 16,
    }
}

fn ergodic_cfg(replicas: usize, seed: u64) -> ErgodicConfig {
    ErgodicConfig {
        epsilons: (2..=6).map(|k| 0.5f64.powi(k)).collect(),
        horizon: 1.0,
        norm_steps: 8,
        delta: 0.3,
        p: 2.0,
        replicas,
        seed,
    }
}

#[test]
fn unit_modulation_has_nothing_to_average() {
    let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
    let cfg = CoefficientConfig { modulation: Modulation::None, ..Default::default() };
    let pair = cfg.build(&gen, 4).unwrap();
    let rep = run_averaging_experiment(&averaging_cfg(6), &FastSpec::ou(0.01), &pair).unwrap();
    for row in &rep.rows {
        assert!(row.distances.iter().all(|d| d.abs() < 1e-12), "{:?}", row.distances);
    }
}

#[test]
fn averaging_is_reproducible() {
    let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
    let pair = CoefficientConfig::default().build(&gen, 4).unwrap();
    let a = run_averaging_experiment(&averaging_cfg(8), &FastSpec::ou(0.01), &pair).unwrap();
    let b = run_averaging_experiment(&averaging_cfg(8), &FastSpec::ou(0.01), &pair).unwrap();
    assert_eq!(a.medians(), b.medians());
    assert!(a.medians().iter().all(|m| *m > 0.0));
}

#[test]
fn averaging_rejects_non_gaussian_fast_law() {
    let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
    let pair = CoefficientConfig::default().build(&gen, 4).unwrap();
    let fast = FastSpec::frac_ou(0.75, 1.0, 0.5, 1.0, 1.0, 0.01);
    assert!(run_averaging_experiment(&averaging_cfg(2), &fast, &pair).is_err());
}

#[test]
fn ergodic_deviation_vanishes_for_unit_modulation() {
    let law = StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let f = ErgodicFunctional::bare(Modulation::None, &law).unwrap();
    let rep = ergodic_deviation(&f, &FastSpec::ou(0.01), &ergodic_cfg(4, 1)).unwrap();
    assert!(rep.values.iter().all(|v| *v == 0.0));
}

#[test]
fn ergodic_half_ensembles_agree() {
    let law = StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let f = ErgodicFunctional::bare(Modulation::Cos, &law).unwrap();
    let a = ergodic_deviation(&f, &FastSpec::ou(0.01), &ergodic_cfg(150, 2)).unwrap();
    let b = ergodic_deviation(&f, &FastSpec::ou(0.01), &ergodic_cfg(150, 3)).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 0.25 * x.max(*y), "{x} vs {y}");
    }
    assert!((a.fit.slope - b.fit.slope).abs() < 0.15, "{} vs {}", a.fit.slope, b.fit.slope);
}

#[test]
fn counterexample_does_not_depend_on_epsilon() {
    let a = wiener_counterexample(0.1, 1.0, 20000, 1000, 1, CounterexampleIntegrand::Cos).unwrap();
    let b = wiener_counterexample(0.01, 1.0, 20000, 1000, 2, CounterexampleIntegrand::Cos).unwrap();
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() < 4.0 * se, "{} vs {}", a.estimate, b.estimate);
    for r in [a, b] {
        assert!((r.estimate - counterexample_constant(1.0)).abs() < 4.0 * r.stderr + 5e-3);
    }
}

#[test]
fn counterexample_with_constant_integrand_is_zero() {
    let r = wiener_counterexample(0.05, 1.0, 100, 200, 3, CounterexampleIntegrand::Constant).unwrap();
    assert_eq!(r.estimate, 0.0);
    let (m, _) = mean_stderr(&[r.estimate]);
    assert_eq!(m, 0.0);
}

#[test]
fn lipschitz_quotient_deviation_shrinks() {
    let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
    let pair = CoefficientConfig::default().build(&gen, 4).unwrap();
    let law = StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let x: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
    let z: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
    let f = ErgodicFunctional::diffusion_lipschitz(&pair, &law, &x, &z).unwrap();
    assert!(f.scale.is_finite() && f.scale > 0.0);
    let rep = ergodic_deviation(&f, &FastSpec::ou(0.01), &ergodic_cfg(200, 4)).unwrap();
    assert!(rep.fit.slope > 0.0, "{:?}", rep.fit);
    assert!(rep.values.iter().all(|v| *v <= f.scale * 2.0));
}
