use proptest::prelude::*;

use mildsew::coefficients::{bump, CoefficientConfig, Modulation};
use mildsew::fbm::{sample_fbm, sample_qfbm, QSpec};
use mildsew::holder::{holder_norm, mild_holder_norm, neg_holder_norm};
use mildsew::path::{SampledPath, ScalarPath};
use mildsew::sewing::{dyadic_partition, riemann_sum, sew, sewing_defect, FnGerm, Germ};
use mildsew::slowfast::{sample_fast_path, tv_to_stationary_ou, FastSpec, FrozenFast};
use mildsew::{DiagonalGenerator, Propagator, SpectralVector, TimeGrid};

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn path_from(values: &[f64], dt: f64) -> SampledPath {
    let grid = TimeGrid::new(dt, values.len() - 1).unwrap();
    SampledPath::from_scalar(&ScalarPath::new(grid, values.to_vec()).unwrap())
}

proptest! {
    #[test]
    fn semigroup_composes(x in vec_strategy(8), s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
        let x: SpectralVector = x.into();
        let a = gen.apply_semigroup(t, &gen.apply_semigroup(s, &x).unwrap()).unwrap();
        let b = gen.apply_semigroup(s + t, &x).unwrap();
        prop_assert!(close(&a, &b, 1e-12));
        prop_assert!(b.norm() <= gen.semigroup_norm(s + t) * x.norm() * (1.0 + 1e-12) + 1e-300);
        let mut c = x.clone().into_inner();
        gen.propagate(s + t, &mut c);
        prop_assert!(close(&c, &b, 1e-14));
    }

    #[test]
    fn fractional_norm_properties(x in vec_strategy(8), k1 in 0.0..1.5f64, dk in 0.0..1.0f64, theta in 0.0..1.0f64) {
        let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
        let v: SpectralVector = x.clone().into();
        let n1 = gen.fractional_norm(k1, &x);
        prop_assert!((n1 - gen.apply_fractional_power(k1, &v).unwrap().norm()).abs() <= 1e-10 * (1.0 + n1));
        // mu_k ≥ 1: the norms increase with κ
        prop_assert!(n1 <= gen.fractional_norm(k1 + dk, &x) * (1.0 + 1e-12) + 1e-12);
        // interpolation: ‖x‖_θ ≤ ‖x‖_0^{1−θ} ‖x‖_1^θ
        let lhs = gen.fractional_norm(theta, &x);
        let rhs = gen.fractional_norm(0.0, &x).powf(1.0 - theta) * gen.fractional_norm(1.0, &x).powf(theta);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
        // ‖S_t x‖_κ ≤ ‖x‖_κ
        let sx = gen.apply_semigroup(0.1, &v).unwrap();
        prop_assert!(gen.fractional_norm(k1, &sx) <= n1 * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn riemann_sums_split_over_partitions(
        data in prop::collection::vec(-1.0..1.0f64, 4 * 33),
        cut in 1usize..32,
    ) {
        let gen = DiagonalGenerator::laplacian_shifted(4).unwrap();
        let dt = 1.0 / 32.0;
        let germ = FnGerm::new("random", 4, dt, move |s, t| {
            (0..4).map(|k| data[4 * s + k] * (t - s) as f64 + data[4 * t + k]).collect()
        });
        let all: Vec<usize> = (0..=32).collect();
        let whole = riemann_sum(&gen, &germ, &all).unwrap();
        let left = riemann_sum(&gen, &germ, &all[..=cut]).unwrap();
        let right = riemann_sum(&gen, &germ, &all[cut..]).unwrap();
        let mut joined = left.into_inner();
        gen.propagate((32 - cut) as f64 * dt, &mut joined);
        for (j, r) in joined.iter_mut().zip(right.iter()) {
            *j += r;
        }
        prop_assert!(close(&joined, &whole, 1e-12));
    }

    #[test]
    fn exact_germs_sew_exactly(g in prop::collection::vec(-3.0..3.0f64, 3 * 65), levels in 1u32..6) {
        // Ξ_{s,t} = g_t − S_{t−s} g_s is additive, so every Riemann sum is exact
        let gen = DiagonalGenerator::laplacian_shifted(3).unwrap();
        let dt = 1.0 / 64.0;
        let gg = g.clone();
        let gen2 = gen.clone();
        let germ = FnGerm::new("exact", 3, dt, move |s, t| {
            let mut early = gg[3 * s..3 * s + 3].to_vec();
            gen2.propagate((t - s) as f64 * dt, &mut early);
            (0..3).map(|k| gg[3 * t + k] - early[k]).collect()
        });
        let r = sew(&gen, &germ, 0, 64, levels).unwrap();
        let want = germ.eval(0, 64);
        prop_assert!(close(&r.value, &want, 1e-12));
        prop_assert!(r.level_diffs.iter().all(|d| *d < 1e-12));
        prop_assert!(sewing_defect(&gen, &germ, 3, 17, 50).unwrap().norm() < 1e-12);
    }

    #[test]
    fn dyadic_partitions_nest(level in 0u32..6, offset in 0usize..10) {
        let p = dyadic_partition(offset, offset + 64, level).unwrap();
        prop_assert_eq!(p.len(), (1usize << level) + 1);
        let q = dyadic_partition(offset, offset + 64, level + 1).unwrap();
        prop_assert!(p.iter().all(|x| q.contains(x)));
    }

    #[test]
    fn bump_shape(r in -10.0..10.0f64, dr in 0.0..3.0f64, radius in 0.5..6.0f64) {
        let b = bump(r, radius);
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert_eq!(b, bump(-r, radius));
        prop_assert!(bump(r.abs() + dr, radius) <= b + 1e-15);
        if r.abs() >= radius {
            prop_assert_eq!(b, 0.0);
        }
        prop_assert_eq!(bump(0.0, radius), 1.0);
    }

    #[test]
    fn bump_is_flat_at_the_boundary(radius in 0.5..6.0f64, gap in 1e-3..5e-3f64) {
        let r = (1.0 - gap) * radius;
        let h = 1e-3 * gap * radius;
        let slope = (bump(r + h, radius) - bump(r - h, radius)).abs() / (2.0 * h);
        // every derivative of exp(1 − 1/(1 − z²)) vanishes as z → 1
        prop_assert!(slope < 1e-10, "{slope}");
        prop_assert_eq!(bump(radius, radius), 0.0);
    }

    #[test]
    fn coefficients_vanish_outside_the_bump(scale in 2.1..10.0f64, y in -3.0..3.0f64) {
        let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
        let pair = CoefficientConfig::default().build(&gen, 3).unwrap();
        let x: Vec<f64> = (0..8).map(|k| if k == 0 { scale } else { 0.0 }).collect();
        // the drift bump is on ‖x‖² < 4
        prop_assert_eq!(pair.drift(&x, y).norm(), 0.0);
        let x0: Vec<f64> = (0..8).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let a = pair.diffusion(&x0, y).frobenius_norm();
        let b = pair.base_diffusion(&x0).frobenius_norm() * Modulation::Cos.eval(y).abs();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn holder_norms_scale_and_order(
        v in prop::collection::vec(-2.0..2.0f64, 17),
        c in -3.0..3.0f64,
        g1 in 0.05..0.5f64,
        dg in 0.0..0.5f64,
    ) {
        let p = path_from(&v, 1.0 / 16.0);
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let ps = path_from(&scaled, 1.0 / 16.0);
        let n = holder_norm(&p, g1).unwrap();
        prop_assert!((holder_norm(&ps, g1).unwrap() - c.abs() * n).abs() <= 1e-10 * (1.0 + n));
        // lags ≤ 1: larger exponents weigh every pair more
        prop_assert!(n <= holder_norm(&p, g1 + dg).unwrap() * (1.0 + 1e-12) + 1e-12);
        prop_assert!((mild_holder_norm(&mildsew::Identity, &p, g1).unwrap() - n).abs() < 1e-14);
    }

    #[test]
    fn negative_norm_triangle(a in prop::collection::vec(-2.0..2.0f64, 17), b in prop::collection::vec(-2.0..2.0f64, 17), delta in 0.05..0.95f64) {
        let pa = path_from(&a, 1.0 / 16.0);
        let pb = path_from(&b, 1.0 / 16.0);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ps = path_from(&sum, 1.0 / 16.0);
        let lhs = neg_holder_norm(&ps, delta).unwrap();
        let rhs = neg_holder_norm(&pa, delta).unwrap() + neg_holder_norm(&pb, delta).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn tv_decreases_in_time(y in -4.0..4.0f64, t in 0.0..5.0f64, dt in 0.0..2.0f64) {
        let a = tv_to_stationary_ou(y, t).unwrap();
        let b = tv_to_stationary_ou(y, t + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-9);
        prop_assert!((a - tv_to_stationary_ou(-y, t).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>()) {
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let a = sample_fbm(0.7, &grid, seed).unwrap();
        let b = sample_fbm(0.7, &grid, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
        let c = sample_fbm(0.7, &grid, seed.wrapping_add(1)).unwrap();
        prop_assert_ne!(a.values(), c.values());
        let q = QSpec::power_law(1.5, 3).unwrap();
        prop_assert_eq!(sample_qfbm(&q, 0.7, &grid, seed).unwrap(), sample_qfbm(&q, 0.7, &grid, seed).unwrap());
        let y1 = sample_fast_path(&FastSpec::ou(0.01), 2.0, seed).unwrap();
        let y2 = sample_fast_path(&FastSpec::ou(0.01), 2.0, seed).unwrap();
        prop_assert_eq!(y1.values(), y2.values());
    }

    #[test]
    fn unit_modulation_freezes_to_one(seed in any::<u64>(), eps in 0.02..0.5f64) {
        let gen = DiagonalGenerator::laplacian_shifted(4).unwrap();
        let cfg = CoefficientConfig { modulation: Modulation::None, ..Default::default() };
        let pair = cfg.build(&gen, 2).unwrap();
        let slow = TimeGrid::uniform(1.0, 8).unwrap();
        let y = sample_fast_path(&FastSpec::ou(0.01), 1.0 / eps, seed).unwrap();
        let frozen = FrozenFast::new(&pair, &y, eps, &slow).unwrap();
        for k in 0..8 {
            let (f, g) = frozen.cell(k);
            prop_assert!((f - 1.0).abs() < 1e-12 && (g - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn sewing_is_thread_count_invariant() {
    let gen = DiagonalGenerator::laplacian_shifted(8).unwrap();
    let grid = TimeGrid::uniform(1.0, 1 << 12).unwrap();
    let h = sample_fbm(0.75, &grid, 4).unwrap();
    let dir: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
    let germ = FnGerm::new("young", 8, grid.dt(), move |s, t| {
        let d = h.values()[t] - h.values()[s];
        dir.iter().map(|a| a * h.values()[s].cos() * d).collect()
    });
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sew(&gen, &germ, 0, 1 << 12, 12).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.value, four.value);
    assert_eq!(one.level_diffs, four.level_diffs);
}
