//! Tabulate the dissipation and noise kernels and the bare parameters.
use qbm::bath::{bare_parameters, dissipation_kernel, noise_kernel, spectral_density, BathSpec, SpectralExponent, Temperature};

fn main() -> qbm::Result<()> {
    for s in [SpectralExponent::Ohmic, SpectralExponent::SupraOhmic] {
        let spec = BathSpec::new(1.0, 0.1, 100.0, s, Temperature::from_millikelvin(50.0)?)?;
        let bare = bare_parameters(&spec);
        println!("s={} J(Ω)={:.6} K₀={:.4} ω₀={:.3}", s.s(), spectral_density(&spec, 1.0)?, bare.k0, bare.omega0());
        println!("{:>10} {:>16} {:>16}", "t_ns", "D(t)", "N(t)");
        for k in 0..8 {
            let t = 1e-3 * 4f64.powi(k);
            println!("{t:>10.4} {:>16.8e} {:>16.8e}", dissipation_kernel(&spec, t), noise_kernel(&spec, t));
        }
    }
    Ok(())
}
