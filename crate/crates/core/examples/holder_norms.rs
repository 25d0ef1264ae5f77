//! Hölder, mild Hölder and negative Hölder norms of an fBm path, and the
//! regularity read off a log–log fit of the mean-square increments.

use mildsew::fbm::sample_fbm;
use mildsew::holder::{fit_rate, holder_norm, mild_holder_norm, neg_holder_norm};
use mildsew::path::SampledPath;
use mildsew::{DiagonalGenerator, SpectralVector, TimeGrid};

fn main() -> mildsew::Result<()> {
    let hurst = 0.7;
    let grid = TimeGrid::uniform(1.0, 1024)?;
    let b = sample_fbm(hurst, &grid, 7)?;
    let path = SampledPath::from_scalar(&b);

    for gamma in [0.3, 0.5, 0.65] {
        println!("|B|_C^{gamma} = {:.4}", holder_norm(&path, gamma)?);
    }
    println!("|dB|_C^-0.3 = {:.4}", neg_holder_norm(&path, 0.3)?);

    let gen = DiagonalGenerator::laplacian_shifted(8)?;
    let state = SampledPath::from_fn(grid, |t| {
        let v = b.values()[(t * 1024.0).round() as usize];
        (0..8).map(|k| v * 0.5f64.powi(k)).collect::<SpectralVector>()
    })?;
    println!("mild |X|_0.5 = {:.4}", mild_holder_norm(&gen, &state, 0.5)?);

    let v = b.values();
    let lags: Vec<usize> = (0..7).map(|k| 1 << k).collect();
    let ms: Vec<f64> = lags
        .iter()
        .map(|&l| v.windows(l + 1).map(|w| (w[l] - w[0]).powi(2)).sum::<f64>() / (v.len() - l) as f64)
        .collect();
    let x: Vec<f64> = lags.iter().map(|&l| l as f64).collect();
    let fit = fit_rate(&x, &ms)?;
    println!("variogram slope {:.3} (2H = {})", fit.slope, 2.0 * hurst);
    Ok(())
}
