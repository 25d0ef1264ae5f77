//! Bump-truncated Nemytskii coefficients `m(y)·base(x)`: Lipschitz and
//! sup estimates, and the pair averaged against the stationary law.

use mildsew::coefficients::{average_coefficient, CoefficientConfig, Modulation, StationaryLaw};
use mildsew::DiagonalGenerator;

fn main() -> mildsew::Result<()> {
    let gen = DiagonalGenerator::laplacian_shifted(16)?;
    let pair = CoefficientConfig::default().build(&gen, 4)?;

    let rep = pair.lipschitz_report(0.3, 200, 1.5, 9);
    println!("{rep:?}");

    let law = StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let avg = average_coefficient(&pair, &law, 16)?;
    println!("E cos(Y) = {:.6} (exp(-1/2) = {:.6})", avg.c_g, (-0.5f64).exp());

    let x: Vec<f64> = (0..16).map(|k| 0.5f64.powi(k)).collect();
    println!("|f(x, 0)| = {:.5}", pair.drift(&x, 0.0).norm());
    println!("|g(x, 0)|_F = {:.5}", pair.diffusion(&x, 0.0).frobenius_norm());
    println!("m(1) for cos: {:.5}", Modulation::Cos.eval(1.0));
    Ok(())
}
