//! Runs an experiment config (default: `configs/counterexample.toml`) and
//! prints the assertion summary.
//!
//! ```text
//! cargo run --release --example run_config -- configs/ergodic.toml /tmp/ergodic
//! ```

use std::path::PathBuf;

use mildsew::experiment::{run, ExperimentConfig};

fn main() -> mildsew::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "configs/counterexample.toml".into());
    let mut cfg = ExperimentConfig::from_file(path.as_ref())?;
    if let Some(out) = args.next() {
        cfg.output.dir = PathBuf::from(out);
    }
    let report = run(&cfg)?;
    print!("{}", report.summary());
    for a in &report.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}
