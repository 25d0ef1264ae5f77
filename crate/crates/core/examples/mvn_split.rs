//! Splits `β_{t+h} − β_t` into the part driven by the history before `t`
//! (smooth in `h`) and the part driven by the window after `t`.

use mildsew::fbm::{decompose_increment, MvnConfig, MvnNoise};

fn main() -> mildsew::Result<()> {
    let cfg = MvnConfig::new(1.0 / 512.0);
    let noise = MvnNoise::sample(0.75, 0.5, 0.25, &cfg, 42)?;
    println!(
        "history cells {}, window steps {}",
        noise.history_cells(),
        noise.window_steps()
    );

    let hs: Vec<f64> = (1..=8).map(|k| k as f64 / 32.0).collect();
    let d = decompose_increment(&noise, &hs)?;
    println!("h,smooth,rough,increment");
    for (i, total) in d.reconstructed().iter().enumerate() {
        println!("{:.5},{:.5},{:.5},{:.5}", d.h[i], d.smooth[i], d.rough[i], total);
    }
    Ok(())
}
