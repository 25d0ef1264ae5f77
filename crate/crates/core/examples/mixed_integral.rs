//! Mixed Wiener–Young integral of a deterministic operator path against a
//! Q-fBm driver, checked against the mild Young integral on the same driver.

use mildsew::fbm::{MvnConfig, MvnNoise, QSpec};
use mildsew::path::OperatorPath;
use mildsew::sewing::{driver_from_noise, mild_young_integral, mixed_wiener_young_integral};
use mildsew::{DiagonalGenerator, SpectralOperator, SpectralVector, TimeGrid};

fn main() -> mildsew::Result<()> {
    let levels = 10;
    let steps = 1usize << levels;
    let gen = DiagonalGenerator::laplacian_shifted(8)?;
    let q = QSpec::power_law(1.5, 3)?;
    let grid = TimeGrid::uniform(1.0, steps)?;
    let g = OperatorPath::new(
        grid,
        grid.times()
            .iter()
            .map(|t| {
                let cols: Vec<SpectralVector> = (0..3)
                    .map(|j| (0..8).map(|k| (t + j as f64).cos() * 0.5f64.powi(k)).collect())
                    .collect();
                SpectralOperator::from_columns(&cols)
            })
            .collect::<mildsew::Result<_>>()?,
    )?;

    let cfg = MvnConfig::new(grid.dt());
    let noises: Vec<MvnNoise> = (0..3)
        .map(|j| MvnNoise::sample(0.75, 0.5, 1.0, &cfg, 100 + j))
        .collect::<mildsew::Result<_>>()?;
    let b = driver_from_noise(&noises, &q, steps)?;

    let young = mild_young_integral(&gen, &g, &b, 0, steps, levels)?.value;
    let mixed = mixed_wiener_young_integral(&gen, &g, &noises, &q)?;
    let mut diff = young.clone();
    diff.axpy(-1.0, &mixed.value);
    println!("|young| = {:.5}", young.norm());
    println!("|mixed| = {:.5} (rough {:.5}, smooth {:.5})", mixed.value.norm(), mixed.rough.norm(), mixed.smooth.norm());
    println!("relative difference {:.2e}", diff.norm() / young.norm());
    Ok(())
}
