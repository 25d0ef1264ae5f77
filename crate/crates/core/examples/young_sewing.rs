//! Dyadic sewing of the Young germ `f_s (h_t − h_s)` with per-level
//! telemetry; `∫ B dB` is compared with `½B_T²`.

use mildsew::fbm::sample_fbm;
use mildsew::path::SampledPath;
use mildsew::sewing::{young_integral_with, YoungScheme};
use mildsew::TimeGrid;

fn main() -> mildsew::Result<()> {
    let levels = 10;
    let grid = TimeGrid::uniform(1.0, 1 << levels)?;
    let b = sample_fbm(0.8, &grid, 1)?;
    let f = SampledPath::from_scalar(&b);
    let exact = 0.5 * b.values()[1 << levels].powi(2);

    for scheme in [YoungScheme::LeftPoint, YoungScheme::Trapezoid] {
        let r = young_integral_with(&f, &b, 0, 1 << levels, levels, scheme)?;
        println!("{scheme:?}: {:.6} (exact {exact:.6})", r.value[0]);
        if scheme == YoungScheme::LeftPoint {
            r.write_telemetry(std::io::stdout().lock(), &[("scheme", "left_point".into())])?;
        }
    }
    Ok(())
}
