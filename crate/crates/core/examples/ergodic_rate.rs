//! Rate at which `∫ (cos(Y_{t/ε}) − E cos Y) dt` vanishes in `C^{−δ}` for an
//! OU fast process.

use mildsew::coefficients::{Modulation, StationaryLaw};
use mildsew::slowfast::{ergodic_deviation, ErgodicConfig, ErgodicFunctional, FastSpec};

fn main() -> mildsew::Result<()> {
    let law = StationaryLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let func = ErgodicFunctional::bare(Modulation::Cos, &law)?;
    let cfg = ErgodicConfig {
        epsilons: (2..=7).map(|k| 0.5f64.powi(k)).collect(),
        horizon: 1.0,
        norm_steps: 8,
        delta: 0.3,
        p: 2.0,
        replicas: 200,
        seed: 5,
    };
    let rep = ergodic_deviation(&func, &FastSpec::ou(0.01), &cfg)?;
    println!("epsilon,deviation");
    for (e, v) in rep.epsilons.iter().zip(&rep.values) {
        println!("{e},{v:.5}");
    }
    println!("slope {:.3}, r2 {:.3}", rep.fit.slope, rep.fit.r_squared);
    Ok(())
}
