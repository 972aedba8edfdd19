//! Closed-form and Lindblad populations, and the optical Bloch model.
use num_complex::Complex64;
use qbm::bath::{BathSpec, SpectralExponent, Temperature};
use qbm::channel::DriveSpec;
use qbm::markov::{lindblad_mls_evolve, markov_populations, optical_bloch_rwa, DensityMatrix, LindbladSpec};

fn main() -> qbm::Result<()> {
    let bath = BathSpec::new(1.0, 0.1, 100.0, SpectralExponent::Ohmic, Temperature::from_millikelvin(50.0)?)?;
    let spec = LindbladSpec::from_bath(&bath, 40)?;
    println!("Γ={:.5} n_B={:.4}", spec.gamma, spec.n_thermal);
    let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
    let ode = lindblad_mls_evolve(&spec, &DensityMatrix::fock(40, 1)?, &times)?;
    for (i, &t) in times.iter().enumerate() {
        let (p0, p1) = markov_populations(&spec, t)?;
        println!("t={t:>4} closed ({p0:.6}, {p1:.6}) ode ({:.6}, {:.6})", ode.rho00[i], ode.rho11[i]);
    }

    let driven = LindbladSpec::new(1.0, 0.02, 0.0, 2)?.with_drive(DriveSpec::sinusoid(0.2, 1.0, 0.0)?);
    let bloch = optical_bloch_rwa(&driven, [0.0, 0.0, -1.0], &times)?;
    let rho = lindblad_mls_evolve(&driven, &DensityMatrix::pure(2, &[Complex64::new(1.0, 0.0)])?, &times)?;
    for (i, s) in bloch.iter().enumerate() {
        println!("t={:>4} rwa σz={:+.4} two-level σz={:+.4}", times[i], s[2], rho.rho11[i] - rho.rho00[i]);
    }
    Ok(())
}
