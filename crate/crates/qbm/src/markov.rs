//! Born–Markov reference dynamics.
//!
//! A damped oscillator in Lindblad form with relaxation rate Γ and thermal
//! occupation n:
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Γ(n+1) D[a]ρ + Γn D[a†]ρ,   H = Ω a†a - x E(t)
//! ```
//!
//! solved in closed form for Fock initial states without drive, by RK4 on a
//! truncated Fock space in general, and in its two-level RWA limit as
//! optical Bloch equations.

use crate::bath::{spectral_density, BathSpec};
use crate::channel::DriveSpec;
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;

type C64 = Complex64;

/// Cutoff ceiling for the automatic raise.
pub const MAX_MLS_CUTOFF: usize = 512;

/// Population allowed in the top Fock level before the cutoff is doubled.
pub const TOP_LEVEL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladSpec {
    pub omega: f64,
    /// Energy relaxation rate Γ.
    pub gamma: f64,
    pub n_thermal: f64,
    pub cutoff: usize,
    pub mass: f64,
    pub drive: Option<DriveSpec>,
}

impl LindbladSpec {
    pub fn new(omega: f64, gamma: f64, n_thermal: f64, cutoff: usize) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("{omega}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("{gamma}")));
        }
        if !(n_thermal >= 0.0 && n_thermal.is_finite()) {
            return Err(invalid("n_thermal", format!("{n_thermal}")));
        }
        if cutoff < 2 {
            return Err(invalid("cutoff", "need at least two levels"));
        }
        Ok(LindbladSpec {
            omega,
            gamma,
            n_thermal,
            cutoff,
            mass: 1.0,
            drive: None,
        })
    }

    /// Golden-rule rate `Γ = J(Ω)/(MΩ)` and Planck occupation at Ω.
    pub fn from_bath(spec: &BathSpec, cutoff: usize) -> Result<Self> {
        let rate = spectral_density(spec, spec.omega)? / (spec.mass * spec.omega);
        let mut out = Self::new(spec.omega, rate, spec.planck_occupation(), cutoff)?;
        out.mass = spec.mass;
        Ok(out)
    }

    pub fn with_drive(mut self, drive: DriveSpec) -> Self {
        self.drive = drive.is_active().then_some(drive);
        self
    }

    /// `⟨0|x|1⟩ = 1/√(2MΩ)`
    pub fn dipole(&self) -> f64 {
        1.0 / (2.0 * self.mass * self.omega).sqrt()
    }

    fn drive_force(&self, t: f64) -> f64 {
        self.drive.map_or(0.0, |d| d.force(t))
    }

    fn drive_amplitude(&self) -> f64 {
        self.drive.map_or(0.0, |d| d.amplitude)
    }
}

fn decay_factors(spec: &LindbladSpec, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t}")));
    }
    let e = (-spec.gamma * t).exp();
    Ok((e, 1.0 + spec.n_thermal * (1.0 - e)))
}

/// Q function at time t of the undriven damped oscillator started in `|k⟩`.
///
/// `Q = e^{-|α|²/D}/(πD) Σ_l C(k,l)/l! ((n+1)(1-e))^{k-l} (|α|²e)^l / D^{k+l}`
/// with `e = e^{-Γt}` and `D = 1 + n(1-e)`.
pub fn markov_q_distribution(spec: &LindbladSpec, k: usize, alpha: C64, t: f64) -> Result<f64> {
    let (e, d) = decay_factors(spec, t)?;
    let x = alpha.norm_sqr();
    let up = (spec.n_thermal + 1.0) * (1.0 - e);
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut lfact = 1.0;
    for l in 0..=k {
        if l > 0 {
            binom *= (k - l + 1) as f64 / l as f64;
            lfact *= l as f64;
        }
        sum += binom / lfact * up.powi((k - l) as i32) * (x * e).powi(l as i32) / d.powi((k + l) as i32);
    }
    Ok((-x / d).exp() / (std::f64::consts::PI * d) * sum)
}

/// `(ρ₀₀, ρ₁₁)` at time t for an initial `|1⟩` without drive.
pub fn markov_populations(spec: &LindbladSpec, t: f64) -> Result<(f64, f64)> {
    let (e, d) = decay_factors(spec, t)?;
    let n = spec.n_thermal;
    let rho00 = (1.0 - e + n * (1.0 - e)) / (d * d);
    let rho11 = (1.0 - (1.0 + e) / d + 2.0 * e / (d * d)) / d;
    Ok((rho00, rho11))
}

/// Dense density matrix on Fock levels `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        DensityMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn fock(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(invalid("fock level", format!("{k} outside cutoff {dim}")));
        }
        let mut r = Self::zeros(dim);
        r.data[k * dim + k] = C64::new(1.0, 0.0);
        Ok(r)
    }

    /// `|ψ⟩⟨ψ|` for `|ψ⟩ = Σ ψ_k |k⟩`.
    pub fn pure(dim: usize, psi: &[C64]) -> Result<Self> {
        if psi.len() > dim {
            return Err(invalid("state", "more amplitudes than levels"));
        }
        let mut r = Self::zeros(dim);
        for (j, a) in psi.iter().enumerate() {
            for (k, b) in psi.iter().enumerate() {
                r.data[j * dim + k] = a * b.conj();
            }
        }
        Ok(r)
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.data[j * self.dim + k]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k).re).sum()
    }

    pub fn population(&self, k: usize) -> f64 {
        if k < self.dim {
            self.get(k, k).re
        } else {
            0.0
        }
    }

    /// Copy into a larger space.
    pub fn embed(&self, dim: usize) -> Self {
        let mut r = Self::zeros(dim.max(self.dim));
        for j in 0..self.dim {
            for k in 0..self.dim {
                r.data[j * r.dim + k] = self.get(j, k);
            }
        }
        r
    }
}

/// `dρ/dt` into `out`.
///
/// Only elements with `|j - k| ≤ band` are computed; without drive the
/// diagonals `j - k = const` evolve independently, so bands that start at
/// zero stay there.
fn lindblad_rhs(spec: &LindbladSpec, t: f64, rho: &DensityMatrix, out: &mut DensityMatrix, sq: &[f64], band: usize) {
    let n = rho.dim;
    let down = spec.gamma * (spec.n_thermal + 1.0);
    let up = spec.gamma * spec.n_thermal;
    let f = spec.drive_force(t) * spec.dipole();
    let om = spec.omega;
    let r = |j: usize, k: usize| rho.data[j * n + k];
    let minus_i = C64::new(0.0, -1.0);
    for j in 0..n {
        // aa† truncated: diagonal j+1 except the top level.
        let aad_j = if j + 1 < n { (j + 1) as f64 } else { 0.0 };
        for k in j.saturating_sub(band)..n.min(j + band + 1) {
            let aad_k = if k + 1 < n { (k + 1) as f64 } else { 0.0 };
            let rjk = r(j, k);
            // -i[H, ρ] with H = Ω a†a - f (a + a†)
            let mut comm = rjk * (om * (j as f64 - k as f64));
            if f != 0.0 {
                let mut xr = C64::new(0.0, 0.0);
                if j + 1 < n {
                    xr += r(j + 1, k) * sq[j + 1];
                }
                if j >= 1 {
                    xr += r(j - 1, k) * sq[j];
                }
                let mut rx = C64::new(0.0, 0.0);
                if k >= 1 {
                    rx += r(j, k - 1) * sq[k];
                }
                if k + 1 < n {
                    rx += r(j, k + 1) * sq[k + 1];
                }
                comm -= (xr - rx) * f;
            }
            let mut v = minus_i * comm;
            // D[a]: a ρ a† - ½{a†a, ρ}
            if j + 1 < n && k + 1 < n {
                v += r(j + 1, k + 1) * (down * sq[j + 1] * sq[k + 1]);
            }
            v -= rjk * (0.5 * down * (j + k) as f64);
            // D[a†]: a† ρ a - ½{a a†, ρ}
            if j >= 1 && k >= 1 {
                v += r(j - 1, k - 1) * (up * sq[j] * sq[k]);
            }
            v -= rjk * (0.5 * up * (aad_j + aad_k));
            out.data[j * n + k] = v;
        }
    }
}

fn axpy(dst: &mut DensityMatrix, src: &DensityMatrix, a: f64, x: &DensityMatrix) {
    for ((d, s), xv) in dst.data.iter_mut().zip(&src.data).zip(&x.data) {
        *d = s + xv * a;
    }
}

/// Largest step keeping RK4 stable and accurate for this generator.
fn stable_step(spec: &LindbladSpec, dim: usize, band: usize) -> f64 {
    let nf = dim as f64;
    let rate = spec.omega * band.min(dim) as f64
        + spec.gamma * (2.0 * spec.n_thermal + 1.0) * nf
        + 2.0 * spec.drive_amplitude() * spec.dipole() * nf.sqrt();
    let freq = spec.drive.map_or(0.0, |d| d.frequency.abs());
    0.1 / rate.max(freq).max(1e-12)
}

/// Integrate `ρ` through `times` (ascending, ≥ 0), calling `observe` at each.
///
/// Steps land exactly on every requested time.
pub fn lindblad_integrate(
    spec: &LindbladSpec,
    initial: &DensityMatrix,
    times: &[f64],
    mut observe: impl FnMut(usize, f64, &DensityMatrix),
) -> Result<()> {
    let n = initial.dim;
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("output times must be ascending and nonnegative".into()));
    }
    let sq: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt()).collect();
    let band = if spec.drive.is_some() {
        n
    } else {
        let mut b = 0;
        for j in 0..n {
            for k in 0..n {
                if initial.get(j, k) != C64::new(0.0, 0.0) {
                    b = b.max(j.abs_diff(k));
                }
            }
        }
        b
    };
    let h_max = stable_step(spec, n, band);
    let mut rho = initial.clone();
    let mut k1 = DensityMatrix::zeros(n);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let mut t = 0.0;
    for (i, &target) in times.iter().enumerate() {
        let span = target - t;
        let steps = (span / h_max).ceil() as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for s in 0..steps {
                let t0 = t + s as f64 * h;
                lindblad_rhs(spec, t0, &rho, &mut k1, &sq, band);
                axpy(&mut tmp, &rho, 0.5 * h, &k1);
                lindblad_rhs(spec, t0 + 0.5 * h, &tmp, &mut k2, &sq, band);
                axpy(&mut tmp, &rho, 0.5 * h, &k2);
                lindblad_rhs(spec, t0 + 0.5 * h, &tmp, &mut k3, &sq, band);
                axpy(&mut tmp, &rho, h, &k3);
                lindblad_rhs(spec, t0 + h, &tmp, &mut k4, &sq, band);
                for m in 0..rho.data.len() {
                    rho.data[m] += (k1.data[m] + (k2.data[m] + k3.data[m]) * 2.0 + k4.data[m]) * (h / 6.0);
                }
            }
            if rho.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite("Lindblad state"));
            }
        }
        t = target;
        observe(i, t, &rho);
    }
    Ok(())
}

/// Qubit-block view of a multi-level trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MlsTrajectory {
    pub times: Vec<f64>,
    pub rho00: Vec<f64>,
    pub rho11: Vec<f64>,
    pub rho01: Vec<C64>,
    pub trace: Vec<f64>,
    pub top_population: Vec<f64>,
    /// Cutoff actually used after any raise.
    pub cutoff: usize,
}

impl MlsTrajectory {
    pub fn leakage(&self, i: usize) -> f64 {
        self.trace[i] - self.rho00[i] - self.rho11[i]
    }
}

/// Evolve the multi-level model, doubling the cutoff while the top level
/// carries more than [`TOP_LEVEL_TOLERANCE`].
pub fn lindblad_mls_evolve(spec: &LindbladSpec, initial: &DensityMatrix, times: &[f64]) -> Result<MlsTrajectory> {
    let mut spec = *spec;
    spec.cutoff = spec.cutoff.max(initial.dim);
    loop {
        let start = initial.embed(spec.cutoff);
        let mut traj = MlsTrajectory {
            times: times.to_vec(),
            rho00: Vec::with_capacity(times.len()),
            rho11: Vec::with_capacity(times.len()),
            rho01: Vec::with_capacity(times.len()),
            trace: Vec::with_capacity(times.len()),
            top_population: Vec::with_capacity(times.len()),
            cutoff: spec.cutoff,
        };
        lindblad_integrate(&spec, &start, times, |_, _, rho| {
            traj.rho00.push(rho.population(0));
            traj.rho11.push(rho.population(1));
            traj.rho01.push(rho.get(0, 1));
            traj.trace.push(rho.trace());
            traj.top_population.push(rho.population(rho.dim - 1));
        })?;
        let top = traj.top_population.iter().cloned().fold(0.0, f64::max);
        if top <= TOP_LEVEL_TOLERANCE || spec.cutoff >= MAX_MLS_CUTOFF {
            if top > TOP_LEVEL_TOLERANCE {
                log::warn!("Lindblad cutoff saturated at {} (top level {top:.2e})", spec.cutoff);
            }
            return Ok(traj);
        }
        let next = (spec.cutoff * 2).min(MAX_MLS_CUTOFF);
        log::warn!("Lindblad top level {top:.2e} at cutoff {}; raising to {next}", spec.cutoff);
        spec.cutoff = next;
    }
}

/// Bloch vector `(σ_x, σ_y, σ_z)` with `σ_x + iσ_y = 2ρ₀₁`, `σ_z = ρ₁₁ - ρ₀₀`.
pub type BlochVector = [f64; 3];

/// Two-level RWA model in the lab frame.
///
/// In the frame rotating at the drive frequency the Bloch vector obeys
/// `ṡ = h × s` with `h = (-Ω_R cos φ, -Ω_R sin φ, Ω - ω_d)`, plus
/// relaxation `T₁ = 1/(Γ(2n+1))`, `T₂ = 2T₁` toward `σ_z = -1/(2n+1)`.
pub fn optical_bloch_rwa(spec: &LindbladSpec, initial: BlochVector, times: &[f64]) -> Result<Vec<BlochVector>> {
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("output times must be ascending and nonnegative".into()));
    }
    let (rabi, phase, wd) = match spec.drive {
        Some(d) => (d.amplitude * spec.dipole(), d.phase, d.frequency),
        None => (0.0, 0.0, spec.omega),
    };
    let h = [-rabi * phase.cos(), -rabi * phase.sin(), spec.omega - wd];
    let relax = spec.gamma * (2.0 * spec.n_thermal + 1.0);
    let sz_eq = -1.0 / (2.0 * spec.n_thermal + 1.0);
    let rhs = |s: [f64; 3]| -> [f64; 3] {
        [
            h[1] * s[2] - h[2] * s[1] - 0.5 * relax * s[0],
            h[2] * s[0] - h[0] * s[2] - 0.5 * relax * s[1],
            h[0] * s[1] - h[1] * s[0] - relax * (s[2] - sz_eq),
        ]
    };
    let scale = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt().max(relax).max(1e-12);
    let h_max = 0.005 / scale;
    let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
    let mut s = initial;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let steps = (span / h_max).ceil() as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(s);
                let k2 = rhs(add(s, k1, 0.5 * dt));
                let k3 = rhs(add(s, k2, 0.5 * dt));
                let k4 = rhs(add(s, k3, dt));
                for m in 0..3 {
                    s[m] += dt / 6.0 * (k1[m] + 2.0 * (k2[m] + k3[m]) + k4[m]);
                }
            }
        }
        t = target;
        // ρ₀₁ picks up e^{iω_d t} leaving the rotating frame.
        let rot = C64::new(s[0], s[1]) * C64::from_polar(1.0, wd * t);
        out.push([rot.re, rot.im, s[2]]);
    }
    Ok(out)
}
