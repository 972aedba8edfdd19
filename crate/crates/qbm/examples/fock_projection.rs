//! Project an evolved |1⟩ onto Fock levels and compare the two routes.
use qbm::bath::{BathSpec, SpectralExponent, Temperature};
use qbm::channel::{ChannelPropagator, DriveSpec};
use qbm::fock::{apply_channel, auto_cutoff, fock_element, fock_element_quadrature, initial_char, QubitBlock};
use qbm::greens::TimeGrid;

fn main() -> qbm::Result<()> {
    let spec = BathSpec::new(1.0, 0.1, 100.0, SpectralExponent::Ohmic, Temperature::Zero)?;
    let prop = ChannelPropagator::new(&spec, TimeGrid::covering(1e-3, 3.0)?, &DriveSpec::none())?;
    let chi0 = initial_char(1, 1, spec.omega)?;
    for t in [0.05, 0.5, 3.0] {
        let chi = apply_channel(&chi0, &prop.channel_at(prop.greens.grid.nearest(t))?);
        let (cutoff, tail) = auto_cutoff(&chi, 20, 1e-10, 400)?;
        let b = QubitBlock::from_char(&chi, cutoff)?;
        let gh = fock_element_quadrature(&chi, 1, 1, 64)?.re;
        println!(
            "t={t:.2} ρ00={:.6} ρ11={:.6} (GH {gh:.6}, moments {:.6}) leakage={:.4} cutoff={cutoff} tail={tail:.1e}",
            b.rho00,
            b.rho11,
            fock_element(&chi, 1, 1)?.re,
            b.leakage()
        );
    }
    Ok(())
}
