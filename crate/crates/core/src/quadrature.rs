//! Small quadrature toolbox: Gauss–Hermite and Gauss–Legendre rules built by
//! Newton iteration on the three-term recurrences, and a tanh-sinh rule for
//! integrands with algebraic endpoint singularities.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights for `∫ e^{−x²} f(x) dx ≈ Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("order", "Gauss-Hermite order must be positive"));
        }
        const PIM4: f64 = 0.751_125_544_464_942_5;
        let n = order;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        Ok(Self {
            nodes: x,
            weights: w,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `E f(Y)` for `Y ~ N(mean, sd²)`.
    pub fn expect_normal(&self, mean: f64, sd: f64, f: impl Fn(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sd;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mean + scale * x))
            .sum::<f64>()
            / PI.sqrt()
    }
}

/// Nodes and weights for `∫_{−1}^{1} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("order", "Gauss-Legendre order must be positive"));
        }
        let n = order;
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[n - 1 - i] = w[i];
        }
        Ok(Self {
            nodes: x,
            weights: w,
        })
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// Abscissae near the endpoints are formed as `a + (b−a)·δ` and
/// `b − (b−a)·δ` with `δ` computed directly, so integrands singular at an
/// endpoint located at zero are sampled without cancellation.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let len = b - a;
    let t_max = 4.0;
    let term = |t: f64| -> f64 {
        let u = 0.5 * PI * t.abs().sinh();
        let e = (-2.0 * u).exp();
        // δ = distance fraction to the nearest endpoint = 1/(1+e^{2u})
        let delta = e / (1.0 + e);
        if delta <= 1e-300 {
            return 0.0;
        }
        let weight = len * PI * t.cosh() * e / ((1.0 + e) * (1.0 + e));
        let x = if t < 0.0 { a + len * delta } else { b - len * delta };
        if x <= a || x >= b {
            return 0.0;
        }
        weight * f(x)
    };
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += term(t) + term(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            add += term(t) + term(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let gh = GaussHermite::new(20).unwrap();
        let m0 = gh.expect_normal(0.0, 1.0, |_| 1.0);
        let m2 = gh.expect_normal(0.0, 1.0, |y| y * y);
        let m4 = gh.expect_normal(0.0, 1.0, |y| y.powi(4));
        assert!((m0 - 1.0).abs() < 1e-13);
        assert!((m2 - 1.0).abs() < 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_cosine_characteristic_function() {
        for order in [8, 16, 32] {
            let gh = GaussHermite::new(order).unwrap();
            let v = gh.expect_normal(0.0, 1.0, f64::cos);
            assert!((v - (-0.5f64).exp()).abs() < 1e-7, "order {order}: {v}");
        }
        let gh = GaussHermite::new(32).unwrap();
        assert!((gh.expect_normal(0.0, 1.0, f64::cos) - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn legendre_polynomials_exact() {
        let gl = GaussLegendre::new(5).unwrap();
        let v = gl.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = tanh_sinh(|x| x.powf(-0.5), 0.0, 1.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // ∫_0^1 ln x dx = -1
        let v = tanh_sinh(f64::ln, 0.0, 1.0, 1e-12);
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }
}
