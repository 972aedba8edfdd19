//! Fundamental solutions in the free and sharp-cutoff limits.
use qbm::bath::{BathSpec, SpectralExponent, Temperature};
use qbm::greens::{solve_fundamental, TimeGrid};

fn main() -> qbm::Result<()> {
    let free = BathSpec::new(1.0, 0.0, 100.0, SpectralExponent::Ohmic, Temperature::Zero)?;
    let gs = solve_fundamental(&free, TimeGrid::covering(1e-3, 10.0)?)?;
    let err = (0..=gs.grid.count).map(|n| (gs.g[n] - gs.time(n).sin()).abs()).fold(0.0, f64::max);
    println!("γ=0: max |g - sin t| = {err:.3e}");

    let gamma = 0.1;
    let spec = BathSpec::new(1.0, gamma, 1e4, SpectralExponent::Ohmic, Temperature::Zero)?;
    let start = std::time::Instant::now();
    let gs = solve_fundamental(&spec, TimeGrid::covering(1e-4, 10.0)?)?;
    let wr = (1.0 - gamma * gamma).sqrt();
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for n in 0..=gs.grid.count {
        let t = gs.time(n);
        let want = (-gamma * t).exp() * (wr * t).sin() / wr;
        err = err.max((gs.g[n] - want).abs());
        scale = scale.max(want.abs());
    }
    println!(
        "Λ=1e4: sup error {:.3e} relative to sup |g| ({} steps, {:.1} s)",
        err / scale,
        gs.grid.count,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
