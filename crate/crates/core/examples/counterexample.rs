//! `E(X^ε_t − X̄_t)²` for `dX^ε = cos(Y_{s/ε}) dW` does not vanish as
//! `ε → 0`; it settles at a positive constant.

use mildsew::slowfast::{counterexample_constant, wiener_counterexample, CounterexampleIntegrand};

fn main() -> mildsew::Result<()> {
    println!("limit {:.6}", counterexample_constant(1.0));
    println!("eps,estimate,stderr");
    for eps in [0.2, 0.1, 0.05] {
        let r = wiener_counterexample(eps, 1.0, 20000, 1000, 11, CounterexampleIntegrand::Cos)?;
        println!("{eps},{:.5},{:.5}", r.estimate, r.stderr);
    }
    let c = wiener_counterexample(0.1, 1.0, 2000, 1000, 11, CounterexampleIntegrand::Constant)?;
    println!("constant integrand: {:.2e}", c.estimate);
    Ok(())
}
