//! Empirical covariance of circulant-embedding fBm paths against
//! `½(s^{2H} + t^{2H} − |t−s|^{2H})`.

use mildsew::fbm::{fbm_covariance, sample_fbm, FgnSampler};
use mildsew::TimeGrid;

fn main() -> mildsew::Result<()> {
    let hurst = 0.75;
    let grid = TimeGrid::uniform(1.0, 256)?;
    let replicas = 4000;
    let probes = [(64, 128), (128, 256), (256, 256)];

    let mut acc = vec![0.0; probes.len()];
    for r in 0..replicas {
        let path = sample_fbm(hurst, &grid, r as u64)?;
        let v = path.values();
        for (a, &(i, j)) in acc.iter_mut().zip(&probes) {
            *a += v[i] * v[j];
        }
    }
    println!("method: {:?}", FgnSampler::new(hurst, 256, grid.dt())?.method());
    println!("s,t,empirical,exact");
    for (a, &(i, j)) in acc.iter().zip(&probes) {
        let (s, t) = (grid.time(i), grid.time(j));
        println!("{s},{t},{:.4},{:.4}", a / replicas as f64, fbm_covariance(hurst, s, t)?);
    }
    Ok(())
}
