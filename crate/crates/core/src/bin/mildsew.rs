use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mildsew::experiment::{format_fit, ratefit_csv, run, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "mildsew", version, about = "Experiments for fBm-driven mild equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "MILDSEW_THREADS")]
    threads: Option<usize>,
    /// Single-threaded reference mode.
    #[arg(long, global = true, env = "MILDSEW_DETERMINISTIC")]
    deterministic: bool,
    /// Master seed (overrides `mc.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// fBm covariance and variogram checks.
    Fbm(Common),
    /// Young integral exactness and mixed-vs-Young agreement.
    Young(Common),
    /// Mild Young remainder rate and dyadic Cauchy decay.
    Sewing(Common),
    /// Mild solution with Richardson estimate and a-priori sweep.
    Solve(Common),
    /// Ergodic deviation rate of a fast functional.
    Ergodic(Common),
    /// Slow-fast averaging distances.
    Average(Common),
    /// Wiener counterexample constant.
    Counterexample(Common),
    /// Runs the experiment named in the config.
    Run(Common),
    /// Log–log fit of two columns of a CSV.
    Ratefit {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Treat the x column as a base-2 exponent (dyadic level).
        #[arg(long)]
        exp2_x: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Ratefit { csv, x, y, exp2_x } => {
            return match ratefit_csv(&csv, &x, &y, exp2_x) {
                Ok(fit) => {
                    println!("{}", format_fit(&fit));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e.to_string()),
            };
        }
        Command::Fbm(c) => (Some(ExperimentKind::Fbm), c),
        Command::Young(c) => (Some(ExperimentKind::Young), c),
        Command::Sewing(c) => (Some(ExperimentKind::Sewing), c),
        Command::Solve(c) => (Some(ExperimentKind::Solve), c),
        Command::Ergodic(c) => (Some(ExperimentKind::Ergodic), c),
        Command::Average(c) => (Some(ExperimentKind::Average), c),
        Command::Counterexample(c) => (Some(ExperimentKind::Counterexample), c),
        Command::Run(c) => (None, c),
    };

    let threads = if common.deterministic { Some(1) } else { common.threads };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&e.to_string());
        }
    }

    let mut cfg = match &common.config {
        Some(p) => match ExperimentConfig::from_file(p) {
            Ok(c) => c,
            Err(e) => return fail(&format!("{}: {e}", p.display())),
        },
        None if kind.is_none() => return fail("run needs --config"),
        None => ExperimentConfig::default(),
    };
    match (kind, cfg.experiment) {
        (Some(k), Some(c)) if k != c => {
            return fail(&format!("config is for `{c}`, not `{k}`"));
        }
        (Some(k), _) => cfg.experiment = Some(k),
        (None, _) => {}
    }
    if let Some(s) = common.seed {
        cfg.mc.seed = s;
    }
    if let Some(o) = common.out {
        cfg.output.dir = o;
    }

    match run(&cfg) {
        Ok(report) => {
            print!("{}", report.summary());
            println!("  artifacts in {}", cfg.output.dir.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e.to_string()),
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}
