//! Assemble the Gaussian channel at a few times and check its invariants.
use qbm::bath::{BathSpec, SpectralExponent, Temperature};
use qbm::channel::{ChannelPropagator, DriveSpec};
use qbm::greens::TimeGrid;

fn main() -> qbm::Result<()> {
    let spec = BathSpec::new(1.0, 0.1, 100.0, SpectralExponent::Ohmic, Temperature::from_millikelvin(50.0)?)?;
    let drive = DriveSpec::sinusoid(0.5, 1.0, 0.0)?;
    let prop = ChannelPropagator::new(&spec, TimeGrid::covering(1e-3, 5.0)?, &drive)?;
    for t in [0.01, 0.1, 1.0, 5.0] {
        let ch = prop.channel_at(prop.greens.grid.nearest(t))?;
        let ev = ch.sigma_eigenvalues();
        println!("t={:.3} Φ={:?}", ch.t, ch.phi);
        println!("      Σ eigenvalues {ev:?}, drift {:?}", ch.drift);
    }
    Ok(())
}
