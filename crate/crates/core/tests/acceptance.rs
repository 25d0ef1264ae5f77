//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use mildsew::coefficients::bump;
use mildsew::experiment::{run, ExperimentConfig, RunReport};
use mildsew::fbm::sample_fbm;
use mildsew::path::SampledPath;
use mildsew::rng::{rng_from_seed, standard_normals};
use mildsew::sewing::{riemann_sum, sew, FnGerm, Germ};
use mildsew::{DiagonalGenerator, Propagator, SpectralVector, TimeGrid};

struct Outcome {
    pass: bool,
    detail: String,
}

fn scratch(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("mildsew-acceptance-{tag}-{}", std::process::id()))
}

fn experiment(tag: &str, toml: &str) -> RunReport {
    let mut cfg = ExperimentConfig::from_toml(toml).expect("acceptance config parses");
    cfg.output.dir = scratch(tag);
    let rep = run(&cfg).expect("acceptance run");
    let _ = std::fs::remove_dir_all(&cfg.output.dir);
    rep
}

fn metric(rep: &RunReport, name: &str) -> f64 {
    rep.metric(name).unwrap_or(f64::NAN)
}

const FBM: &str = r#"
experiment = "fbm"
[grid]
horizon = 1.0
steps = 512
[mc]
replicas = 20000
seed = 1
[model]
hurst_list = [0.6, 0.75, 0.9]
subgrid = 16
"#;

const YOUNG: &str = r#"
experiment = "young"
[generator]
kind = "laplacian_shifted"
n_modes = 16
[q]
q_exponent = 1.5
m_modes = 8
[grid]
levels = 12
[mc]
seed = 3
[model]
hurst = 0.75
mixed_drivers = 20
mixed_levels = 12
base_time = 0.5
"#;

const SEWING: &str = r#"
experiment = "sewing"
[generator]
kind = "laplacian_shifted"
n_modes = 16
[q]
q_exponent = 1.5
m_modes = 8
[grid]
levels = 12
[mc]
replicas = 200
seed = 5
[model]
hurst = 0.75
alpha = 0.75
sizes = 6
rate_replicas = 32
"#;

const ERGODIC: &str = r#"
experiment = "ergodic"
[coefficients]
modulation = "cos"
[fast]
kind = "ou"
fine_step = 0.01
[grid]
horizon = 1.0
steps = 8
[mc]
replicas = 500
p = [2.0]
seed = 11
[model]
delta = 0.3
epsilons = [0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125]
"#;

const COUNTEREXAMPLE: &str = r#"
experiment = "counterexample"
[grid]
steps = 1000
[mc]
replicas = 50000
seed = 5
[model]
t = 1.0
epsilons = [0.1]
"#;

const AVERAGE: &str = r#"
experiment = "average"
[generator]
kind = "laplacian_shifted"
n_modes = 16
[q]
q_exponent = 1.5
m_modes = 8
[coefficients]
modulation = "cos"
[fast]
kind = "ou"
fine_step = 0.01
[grid]
horizon = 1.0
steps = 8
[mc]
replicas = 200
seed = 3
[model]
hurst = 0.75
alpha = 0.55
epsilons = [0.2, 0.1, 0.05, 0.025]
"#;

const SOLVE: &str = r#"
experiment = "solve"
[generator]
kind = "laplacian_shifted"
n_modes = 16
[q]
q_exponent = 1.5
m_modes = 8
[grid]
horizon = 1.0
steps = 512
[mc]
seed = 7
[model]
hurst = 0.75
gamma = 0.5
scales = [1.0, 2.0, 4.0, 8.0]
"#;

fn c1(fbm: &RunReport) -> Outcome {
    let ratio = metric(fbm, "max_cov_error_over_stderr");
    Outcome {
        pass: ratio <= 4.0,
        detail: format!(
            "max |cov error| = {:.4} = {ratio:.2} stderr (≤ 4)",
            metric(fbm, "max_cov_error")
        ),
    }
}

fn c2(fbm: &RunReport) -> Outcome {
    let e = metric(fbm, "variogram_slope_error");
    Outcome {
        pass: e <= 0.1,
        detail: format!("max |slope − 2H| = {e:.4} (≤ 0.1)"),
    }
}

fn c3(young: &RunReport) -> Outcome {
    let rel = metric(young, "trapezoid_rel_error");
    let one = metric(young, "constant_max_error");
    Outcome {
        pass: rel <= 1e-3 && one <= 1e-12,
        detail: format!("level-12 relative error {rel:.2e} (≤ 1e-3), f ≡ 1 max error {one:.1e}"),
    }
}

fn c4(sewing: &RunReport) -> Outcome {
    let (s, r2) = (metric(sewing, "rate_slope"), metric(sewing, "rate_r_squared"));
    Outcome {
        pass: s >= 1.3 && r2 >= 0.9,
        detail: format!("slope {s:.3} (≥ 1.3), R² {r2:.4} (≥ 0.9)"),
    }
}

fn c5(sewing: &RunReport) -> Outcome {
    let r = metric(sewing, "mean_level_ratio");
    Outcome {
        pass: r <= 0.8,
        detail: format!("mean level ratio over levels 4–10: {r:.3} (≤ 0.8)"),
    }
}

fn c6(young: &RunReport) -> Outcome {
    let r = metric(young, "mixed_max_rel_error");
    Outcome {
        pass: r <= 1e-2,
        detail: format!("max relative difference over 20 drivers {r:.2e} (≤ 1e-2)"),
    }
}

fn c7() -> Outcome {
    let rep = experiment("ergodic", ERGODIC);
    let (s, r2) = (metric(&rep, "slope"), metric(&rep, "r_squared"));
    Outcome {
        pass: (0.3..=0.6).contains(&s) && r2 >= 0.9,
        detail: format!("slope {s:.3} (in [0.3, 0.6]), R² {r2:.4} (≥ 0.9)"),
    }
}

fn c8() -> Outcome {
    let rep = experiment("counterexample", COUNTEREXAMPLE);
    let (est, err) = (metric(&rep, "estimate"), metric(&rep, "abs_error"));
    Outcome {
        pass: err <= 0.02,
        detail: format!("estimate {est:.5}, |error| {err:.5} (≤ 0.02)"),
    }
}

fn c9() -> Outcome {
    let rep = experiment("average", AVERAGE);
    let monotone = metric(&rep, "monotone") == 1.0;
    let shrink = metric(&rep, "shrink_ratio");
    Outcome {
        pass: monotone && shrink <= 1.0 / 3.0,
        detail: format!(
            "medians {:.4} → {:.4}, strictly decreasing: {monotone}, last/first {shrink:.3} (≤ 0.333)",
            metric(&rep, "first_median"),
            metric(&rep, "last_median")
        ),
    }
}

fn c10() -> Outcome {
    let rep = experiment("solve", SOLVE);
    let (s, r2) = (metric(&rep, "apriori_slope"), metric(&rep, "apriori_r_squared"));
    let finite = metric(&rep, "sup_norm").is_finite();
    Outcome {
        pass: s.is_finite() && s <= 10.0 && r2 >= 0.8 && finite,
        detail: format!("slope {s:.3} (≤ 10), R² {r2:.4} (≥ 0.8), bounded: {finite}"),
    }
}

/// Seeded batch of the exact invariants.
fn c11() -> Outcome {
    let mut failures: Vec<&str> = Vec::new();
    let mut rng = rng_from_seed(2024);
    let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
    let tol = 1e-10;
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()));

    for _ in 0..200 {
        let x: SpectralVector = standard_normals(&mut rng, 8).into();
        let u = standard_normals(&mut rng, 2);
        let (s, t) = (u[0].abs(), u[1].abs());
        let a = gen.apply_semigroup(t, &gen.apply_semigroup(s, &x).unwrap()).unwrap();
        let b = gen.apply_semigroup(s + t, &x).unwrap();
        if !close(&a, &b) || gen.apply_semigroup(0.0, &x).unwrap() != x {
            failures.push("semigroup");
        }
        let k = s.fract();
        let direct = gen.fractional_norm(k, &x);
        let via = gen.apply_fractional_power(k, &x).unwrap().norm();
        let interp = gen.fractional_norm(0.0, &x).powf(1.0 - k) * gen.fractional_norm(1.0, &x).powf(k);
        if (direct - via).abs() > tol * (1.0 + direct) || direct > interp * (1.0 + tol) {
            failures.push("fractional norm");
        }
    }

    let dt = 1.0 / 64.0;
    for _ in 0..20 {
        let g = standard_normals(&mut rng, 8 * 65);
        let prop = gen.clone();
        let germ = FnGerm::new("exact", 8, dt, move |s, t| {
            let mut early = g[8 * s..8 * s + 8].to_vec();
            prop.propagate((t - s) as f64 * dt, &mut early);
            (0..8).map(|k| g[8 * t + k] - early[k]).collect()
        });
        let r = sew(&gen, &germ, 0, 64, 6).unwrap();
        if !close(&r.value, &germ.eval(0, 64)) {
            failures.push("sewing exactness");
        }
        let all: Vec<usize> = (0..=64).collect();
        let whole = riemann_sum(&gen, &germ, &all).unwrap();
        let mut left = riemann_sum(&gen, &germ, &all[..=20]).unwrap().into_inner();
        gen.propagate(44.0 * dt, &mut left);
        let right = riemann_sum(&gen, &germ, &all[20..]).unwrap();
        let joined: Vec<f64> = left.iter().zip(right.iter()).map(|(a, b)| a + b).collect();
        if !close(&joined, &whole) {
            failures.push("sewing additivity");
        }
    }

    // φ and its difference quotients vanish approaching the boundary
    for radius in [1.0, 4.0] {
        let mut prev = f64::INFINITY;
        for z in [0.9, 0.95, 0.98, 0.99, 0.995] {
            let r = z * radius;
            let h = 1e-6 * radius;
            let d1 = (bump(r + h, radius) - bump(r - h, radius)).abs() / (2.0 * h);
            if d1 > prev || bump(radius, radius) != 0.0 || bump(r, radius) >= 1.0 {
                failures.push("bump boundary");
            }
            prev = d1;
        }
        if prev > 1e-10 || bump(0.999 * radius, radius) > 1e-100 {
            failures.push("bump boundary");
        }
    }

    let grid = TimeGrid::uniform(1.0, 1024).unwrap();
    let a = sample_fbm(0.75, &grid, 99).unwrap();
    let b = sample_fbm(0.75, &grid, 99).unwrap();
    let pa = SampledPath::from_scalar(&a);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let ya = one.install(|| mildsew::sewing::young_integral(&pa, &a, 0, 1024, 10).unwrap());
    let yb = many.install(|| mildsew::sewing::young_integral(&pa, &a, 0, 1024, 10).unwrap());
    if a.values() != b.values() || ya != yb {
        failures.push("determinism");
    }

    failures.dedup();
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "semigroup, fractional norms, sewing additivity, bump boundary, determinism".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, Outcome, f64)> = Vec::new();
    let mut timed = |n: u32, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        let secs = t0.elapsed().as_secs_f64();
        println!("criterion {n:>2}: {} {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o, secs));
    };

    let t0 = Instant::now();
    let fbm = experiment("fbm", FBM);
    let fbm_secs = t0.elapsed().as_secs_f64();
    timed(1, &mut || c1(&fbm));
    timed(2, &mut || c2(&fbm));
    println!("  (fbm experiment {fbm_secs:.1}s)");

    let t0 = Instant::now();
    let young = experiment("young", YOUNG);
    let young_secs = t0.elapsed().as_secs_f64();
    timed(3, &mut || c3(&young));

    let t0 = Instant::now();
    let sewing = experiment("sewing", SEWING);
    let sewing_secs = t0.elapsed().as_secs_f64();
    timed(4, &mut || c4(&sewing));
    timed(5, &mut || c5(&sewing));
    println!("  (sewing experiment {sewing_secs:.1}s)");
    timed(6, &mut || c6(&young));
    println!("  (young experiment {young_secs:.1}s)");
    timed(7, &mut c7);
    timed(8, &mut c8);
    timed(9, &mut c9);
    timed(10, &mut c10);
    timed(11, &mut c11);

    let failed: Vec<u32> = results.iter().filter(|(_, o, _)| !o.pass).map(|(n, _, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} criteria fail: {failed:?}", failed.len(), results.len());
        ExitCode::FAILURE
    }
}
