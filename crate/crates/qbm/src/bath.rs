//! Bath spectral density, dissipation and noise kernels, bare parameters.
//!
//! Units: ħ = k_B = 1, time in ns, frequencies in rad/ns.
//!
//! ```text
//! J(ω) = 2Mγ ωˢ e^{-ω/Λ}
//! D(t) = -(1/π) ∫ J(ω) sin ωt dω = -(2Mγ/π) Γ(s+1) Im (a - it)^{-(s+1)}
//! N(t) =  (1/π) ∫ J(ω) coth(βω/2) cos ωt dω
//!      =  (2Mγ/π) Γ(s+1) Re[ w₀^{-(s+1)} + 2 Σ_{n≥1} (w₀ + nβ)^{-(s+1)} ]
//! ```
//! with `a = 1/Λ` and `w₀ = a - it`.

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// k_B/ħ in rad/ns per millikelvin (SI-exact k_B and ħ).
pub const KB_OVER_HBAR_RAD_PER_NS_PER_MK: f64 = 1.380_649e-23 / 1.054_571_817e-34 * 1e-12;

/// Terms of the Bose series summed explicitly before the Euler–Maclaurin tail.
const BOSE_EXPLICIT_TERMS: usize = 24;

/// Low-frequency exponent of the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SpectralExponent {
    Ohmic,
    SupraOhmic,
}

impl SpectralExponent {
    pub fn s(self) -> i32 {
        match self {
            SpectralExponent::Ohmic => 1,
            SpectralExponent::SupraOhmic => 3,
        }
    }

    /// Γ(s+1) = s!
    fn gamma_s_plus_1(self) -> f64 {
        match self {
            SpectralExponent::Ohmic => 1.0,
            SpectralExponent::SupraOhmic => 6.0,
        }
    }

    /// Γ(s) = (s-1)!
    fn gamma_s(self) -> f64 {
        match self {
            SpectralExponent::Ohmic => 1.0,
            SpectralExponent::SupraOhmic => 2.0,
        }
    }
}

impl TryFrom<u32> for SpectralExponent {
    type Error = Error;
    fn try_from(s: u32) -> Result<Self> {
        match s {
            1 => Ok(SpectralExponent::Ohmic),
            3 => Ok(SpectralExponent::SupraOhmic),
            other => Err(invalid("spectral_exponent", format!("{other} (only 1 or 3)"))),
        }
    }
}

/// Bath temperature, either exactly zero or given by β in ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Zero,
    Finite { beta: f64 },
}

impl Temperature {
    pub fn from_millikelvin(t_mk: f64) -> Result<Self> {
        if !(t_mk >= 0.0) || !t_mk.is_finite() {
            return Err(invalid("temperature", format!("{t_mk} mK")));
        }
        if t_mk == 0.0 {
            Ok(Temperature::Zero)
        } else {
            Ok(Temperature::Finite {
                beta: 1.0 / (KB_OVER_HBAR_RAD_PER_NS_PER_MK * t_mk),
            })
        }
    }

    pub fn beta(self) -> Option<f64> {
        match self {
            Temperature::Zero => None,
            Temperature::Finite { beta } => Some(beta),
        }
    }
}

/// Physical parameters of the oscillator and its bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub mass: f64,
    pub omega: f64,
    pub gamma: f64,
    pub cutoff: f64,
    pub exponent: SpectralExponent,
    pub temperature: Temperature,
}

impl BathSpec {
    /// Unit-mass spec.
    pub fn new(
        omega: f64,
        gamma: f64,
        cutoff: f64,
        exponent: SpectralExponent,
        temperature: Temperature,
    ) -> Result<Self> {
        Self::with_mass(1.0, omega, gamma, cutoff, exponent, temperature)
    }

    pub fn with_mass(
        mass: f64,
        omega: f64,
        gamma: f64,
        cutoff: f64,
        exponent: SpectralExponent,
        temperature: Temperature,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("{mass}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("{omega}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("{gamma}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(invalid("cutoff", format!("{cutoff}")));
        }
        if let Temperature::Finite { beta } = temperature {
            if !(beta > 0.0) || beta.is_nan() {
                return Err(Error::Domain(format!("inverse temperature β = {beta}")));
            }
        }
        Ok(BathSpec {
            mass,
            omega,
            gamma,
            cutoff,
            exponent,
            temperature,
        })
    }

    /// Planck occupation of the oscillator frequency, 0 at T = 0.
    pub fn planck_occupation(&self) -> f64 {
        match self.temperature {
            Temperature::Zero => 0.0,
            Temperature::Finite { beta } => 1.0 / (beta * self.omega).exp_m1(),
        }
    }

    fn prefactor(&self) -> f64 {
        2.0 * self.mass * self.gamma / PI * self.exponent.gamma_s_plus_1()
    }
}

/// Bare mass and spring constant entering the equation of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareParams {
    pub mass0: f64,
    pub k0: f64,
}

impl BareParams {
    /// Bare frequency √(K₀/M₀).
    pub fn omega0(&self) -> f64 {
        (self.k0 / self.mass0).sqrt()
    }

    /// The literal supra-Ohmic values `M₀ = M + 4MγΛ/π`, `K₀ = MΩ² + 4MγΛ³/(3π)`.
    ///
    /// These leave a net negative static stiffness and an exponentially
    /// growing Green function; kept only to demonstrate that.
    pub fn literal_supra_ohmic(spec: &BathSpec) -> BareParams {
        match spec.exponent {
            SpectralExponent::Ohmic => bare_parameters(spec),
            SpectralExponent::SupraOhmic => {
                let m = spec.mass;
                let l = spec.cutoff;
                BareParams {
                    mass0: m + 4.0 * m * spec.gamma * l / PI,
                    k0: m * spec.omega * spec.omega + 4.0 * m * spec.gamma * l.powi(3) / (3.0 * PI),
                }
            }
        }
    }
}

/// `J(ω) = 2Mγ ωˢ e^{-ω/Λ}` for ω ≥ 0.
pub fn spectral_density(spec: &BathSpec, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("frequency ω = {omega}")));
    }
    Ok(2.0 * spec.mass * spec.gamma * omega.powi(spec.exponent.s()) * (-omega / spec.cutoff).exp())
}

/// Dissipation kernel D(t), odd in t.
pub fn dissipation_kernel(spec: &BathSpec, t: f64) -> f64 {
    if t == 0.0 || spec.gamma == 0.0 {
        return 0.0;
    }
    let p = spec.exponent.s() + 1;
    let w = Complex64::new(1.0 / spec.cutoff, -t.abs());
    let v = -spec.prefactor() * w.powi(-p).im;
    if t < 0.0 {
        -v
    } else {
        v
    }
}

/// Noise kernel N(t), even in t.
pub fn noise_kernel(spec: &BathSpec, t: f64) -> f64 {
    if spec.gamma == 0.0 {
        return 0.0;
    }
    let p = spec.exponent.s() + 1;
    let w0 = Complex64::new(1.0 / spec.cutoff, -t.abs());
    let mut sum = w0.powi(-p);
    if let Temperature::Finite { beta } = spec.temperature {
        sum += 2.0 * bose_series(w0, beta, p);
    }
    spec.prefactor() * sum.re
}

/// Σ_{n≥1} (w₀ + nβ)^{-p}: explicit head plus Euler–Maclaurin tail.
fn bose_series(w0: Complex64, beta: f64, p: i32) -> Complex64 {
    let n_tail = BOSE_EXPLICIT_TERMS;
    let mut head = Complex64::new(0.0, 0.0);
    for n in 1..n_tail {
        head += (w0 + n as f64 * beta).powi(-p);
    }
    let w = w0 + n_tail as f64 * beta;
    let pf = p as f64;
    let inv = w.inv();
    let wp = w.powi(-p);
    let c1 = pf * beta / 12.0;
    let c3 = pf * (pf + 1.0) * (pf + 2.0) * beta.powi(3) / 720.0;
    let c5 = pf * (pf + 1.0) * (pf + 2.0) * (pf + 3.0) * (pf + 4.0) * beta.powi(5) / 30240.0;
    let c7 = pf * (pf + 1.0) * (pf + 2.0) * (pf + 3.0) * (pf + 4.0) * (pf + 5.0) * (pf + 6.0)
        * beta.powi(7)
        / 1_209_600.0;
    let inv2 = inv * inv;
    let tail = w.powi(1 - p) / ((pf - 1.0) * beta)
        + 0.5 * wp
        + wp * inv * (c1 - inv2 * (c3 - inv2 * (c5 - inv2 * c7)));
    head + tail
}

/// Counterterm-renormalized bare parameters.
///
/// `K₀ = MΩ² - 2∫₀^∞ D = MΩ² + (4Mγ/π) Γ(s) Λˢ` and `M₀ = M` for both
/// exponents, so the static frequency renormalizes back to Ω.
pub fn bare_parameters(spec: &BathSpec) -> BareParams {
    let m = spec.mass;
    BareParams {
        mass0: m,
        k0: m * spec.omega * spec.omega - 2.0 * static_dissipation_integral(spec),
    }
}

/// `∫₀^∞ D(τ) dτ = -(2Mγ/π) Γ(s) Λˢ`.
pub fn static_dissipation_integral(spec: &BathSpec) -> f64 {
    -2.0 * spec.mass * spec.gamma / PI * spec.exponent.gamma_s() * spec.cutoff.powi(spec.exponent.s())
}
