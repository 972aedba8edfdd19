//! Gaussian Wigner-level propagator at a readout time.
//!
//! A channel acts on Wigner characteristic functions of `(R, P)` as
//!
//! ```text
//! χ'(ξ) = χ(Φᵀξ) · exp(-½ ξᵀΣξ + i dᵀξ)
//! ```
//!
//! `Φ` comes from the u-matrix, `Σ` from the fluctuation integrals
//! `a_kl = ½∫∫ v_k(s) N(s-s') v_l(s') ds ds'`, `d` from the drive.

use crate::bath::{noise_kernel, BathSpec};
use crate::error::{invalid, Result};
use crate::greens::{boundary_solutions, solve_fundamental, u_matrix, GreensSolution, TimeGrid, UMatrix};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;

pub type Mat2 = [[f64; 2]; 2];

/// External force on the oscillator coordinate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    None,
    Sinusoid,
}

/// `E(t) = E₀ cos(ω_d t + φ)` or no drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub waveform: Waveform,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl DriveSpec {
    pub fn none() -> Self {
        DriveSpec {
            waveform: Waveform::None,
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
        }
    }

    pub fn sinusoid(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(invalid("drive amplitude", format!("{amplitude}")));
        }
        if !frequency.is_finite() || !phase.is_finite() {
            return Err(invalid("drive frequency/phase", "must be finite"));
        }
        Ok(DriveSpec {
            waveform: Waveform::Sinusoid,
            amplitude,
            frequency,
            phase,
        })
    }

    pub fn is_active(&self) -> bool {
        self.waveform != Waveform::None && self.amplitude != 0.0
    }

    pub fn force(&self, t: f64) -> f64 {
        match self.waveform {
            Waveform::None => 0.0,
            Waveform::Sinusoid => self.amplitude * (self.frequency * t + self.phase).cos(),
        }
    }
}

/// Full propagator at one readout time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel {
    pub t: f64,
    pub phi: Mat2,
    pub sigma: Mat2,
    pub drift: [f64; 2],
    pub alpha_f: Complex64,
}

impl GaussianChannel {
    pub fn identity() -> Self {
        GaussianChannel {
            t: 0.0,
            phi: [[1.0, 0.0], [0.0, 1.0]],
            sigma: [[0.0; 2]; 2],
            drift: [0.0; 2],
            alpha_f: Complex64::new(0.0, 0.0),
        }
    }

    /// Eigenvalues of Σ, ascending.
    pub fn sigma_eigenvalues(&self) -> [f64; 2] {
        sym_eigenvalues(&self.sigma)
    }

    /// Output covariance of a Gaussian input with covariance `v`.
    pub fn evolve_covariance(&self, v: &Mat2) -> Mat2 {
        let pv = mat_mul(&self.phi, v);
        let mut out = mat_mul(&pv, &transpose(&self.phi));
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += self.sigma[i][j];
            }
        }
        out
    }
}

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub(crate) fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub(crate) fn sym_eigenvalues(m: &Mat2) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let d = 0.5 * (m[0][0] - m[1][1]);
    let off = 0.5 * (m[0][1] + m[1][0]);
    let r = d.hypot(off);
    [0.5 * tr - r, 0.5 * tr + r]
}

/// Exact 2D product weights of N against pairs of linear hat shapes.
///
/// `E_XY(k) = h² ∫₀¹∫₀¹ X(u) Y(u') N(h(k + u - u')) du du'` for shapes
/// `R(u) = 1-u`, `L(u) = u`, stored for k ≥ 0. Negative offsets follow from
/// `E_XY(-k) = E_YX(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePairWeights {
    pub rr: Vec<f64>,
    pub rl: Vec<f64>,
    pub lr: Vec<f64>,
    pub ll: Vec<f64>,
}

impl NoisePairWeights {
    pub fn new(spec: &BathSpec, step: f64, count: usize) -> Self {
        let outer = gauss_legendre(16);
        let inner = gauss_legendre(3);
        // Overlap shapes K̃_XY(x) = ∫ X(u) Y(u-x) du on the two halves.
        let mut xs = Vec::with_capacity(32);
        let mut kernels = Vec::with_capacity(32);
        for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
            let r = outer.mapped(lo, hi);
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                let (ua, ub) = (f64::max(0.0, *x), f64::min(1.0, 1.0 + x));
                let ir = inner.mapped(ua, ub);
                let mut k = [0.0; 4];
                for (u, wu) in ir.nodes.iter().zip(&ir.weights) {
                    let (xr, xl) = (1.0 - u, *u);
                    let up = u - x;
                    let (yr, yl) = (1.0 - up, up);
                    k[0] += wu * xr * yr;
                    k[1] += wu * xr * yl;
                    k[2] += wu * xl * yr;
                    k[3] += wu * xl * yl;
                }
                xs.push(*x);
                kernels.push([k[0] * w, k[1] * w, k[2] * w, k[3] * w]);
            }
        }
        let h2 = step * step;
        let mut out = NoisePairWeights {
            rr: vec![0.0; count + 1],
            rl: vec![0.0; count + 1],
            lr: vec![0.0; count + 1],
            ll: vec![0.0; count + 1],
        };
        if spec.gamma == 0.0 {
            return out;
        }
        for k in 0..=count {
            let mut acc = [0.0; 4];
            for (x, kw) in xs.iter().zip(&kernels) {
                let n = noise_kernel(spec, step * (k as f64 + x));
                for q in 0..4 {
                    acc[q] += n * kw[q];
                }
            }
            out.rr[k] = h2 * acc[0];
            out.rl[k] = h2 * acc[1];
            out.lr[k] = h2 * acc[2];
            out.ll[k] = h2 * acc[3];
        }
        out
    }

    /// `E_XY(k)` for any signed offset; `x_left`/`y_left` select the L shape.
    pub fn get(&self, x_left: bool, y_left: bool, k: i64) -> f64 {
        let (xl, yl, k) = if k < 0 { (y_left, x_left, (-k) as usize) } else { (x_left, y_left, k as usize) };
        match (xl, yl) {
            (false, false) => self.rr[k],
            (false, true) => self.rl[k],
            (true, false) => self.lr[k],
            (true, true) => self.ll[k],
        }
    }
}

/// Running Gram integrals `I_ff'(t_m) = ∫₀^{t_m}∫₀^{t_m} f(τ)N(τ-τ')f'(τ')`
/// for f, f' ∈ {g, h}, at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIntegrals {
    pub gg: Vec<f64>,
    pub gh: Vec<f64>,
    pub hh: Vec<f64>,
}

impl NoiseIntegrals {
    pub fn accumulate(gs: &GreensSolution, w: &NoisePairWeights) -> Self {
        let n = gs.grid.count;
        let (g, h) = (&gs.g, &gs.h);
        let mut out = NoiseIntegrals {
            gg: vec![0.0; n + 1],
            gh: vec![0.0; n + 1],
            hh: vec![0.0; n + 1],
        };
        for m in 0..n {
            // Q_f^X(m) = Σ_{j<m} f_j E_XR(m-j) + f_{j+1} E_XL(m-j)
            let (mut qg_r, mut qg_l, mut qh_r, mut qh_l) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..m {
                let k = m - j;
                let (rr, rl, lr, ll) = (w.rr[k], w.rl[k], w.lr[k], w.ll[k]);
                qg_r += g[j] * rr + g[j + 1] * rl;
                qg_l += g[j] * lr + g[j + 1] * ll;
                qh_r += h[j] * rr + h[j + 1] * rl;
                qh_l += h[j] * lr + h[j + 1] * ll;
            }
            let (g_r, g_l, h_r, h_l) = (g[m], g[m + 1], h[m], h[m + 1]);
            let self_term = |ar: f64, al: f64, br: f64, bl: f64| {
                ar * br * w.rr[0] + ar * bl * w.rl[0] + al * br * w.lr[0] + al * bl * w.ll[0]
            };
            let cross_gg = g_r * qg_r + g_l * qg_l;
            let cross_hh = h_r * qh_r + h_l * qh_l;
            let cross_gh = g_r * qh_r + g_l * qh_l + h_r * qg_r + h_l * qg_l;
            out.gg[m + 1] = out.gg[m] + 2.0 * cross_gg + self_term(g_r, g_l, g_r, g_l);
            out.hh[m + 1] = out.hh[m] + 2.0 * cross_hh + self_term(h_r, h_l, h_r, h_l);
            out.gh[m + 1] = out.gh[m] + cross_gh + self_term(g_r, g_l, h_r, h_l);
        }
        out
    }

    /// `a_kl` at node n from the Gram integrals.
    pub fn fluctuation_matrix(&self, gs: &GreensSolution, n: usize) -> Result<Mat2> {
        gs.check_caustic(n)?;
        let gt = gs.g[n];
        let r = gs.h[n] / gt;
        let (igg, igh, ihh) = (self.gg[n], self.gh[n], self.hh[n]);
        let a11 = 0.5 * igg / (gt * gt);
        let a12 = 0.5 * (igh - r * igg) / gt;
        let a22 = 0.5 * (ihh - 2.0 * r * igh + r * r * igg);
        Ok([[a11, a12], [a12, a22]])
    }
}

/// Direct double sum for `a_kl` at node n over the sampled `v₁, v₂`.
///
/// Uses the same product weights as [`NoiseIntegrals`], at O(n²) cost.
pub fn fluctuation_integrals(gs: &GreensSolution, weights: &NoisePairWeights, n: usize) -> Result<Mat2> {
    let b = boundary_solutions(gs, n)?;
    let v = [&b.v1, &b.v2];
    let mut a = [[0.0; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            let (vk, vl) = (v[k], v[l]);
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let off = i as i64 - j as i64;
                    s += vk[i] * vl[j] * weights.get(false, false, off)
                        + vk[i] * vl[j + 1] * weights.get(false, true, off)
                        + vk[i + 1] * vl[j] * weights.get(true, false, off)
                        + vk[i + 1] * vl[j + 1] * weights.get(true, true, off);
                }
            }
            a[k][l] = 0.5 * s;
        }
    }
    let sym = 0.5 * (a[0][1] + a[1][0]);
    a[0][1] = sym;
    a[1][0] = sym;
    Ok(a)
}

/// `Φ = (-1/u₂₁)·[[u₁₁, 1], [det u, u₂₂]]`.
pub fn mean_map(u: &UMatrix) -> Mat2 {
    let c = -1.0 / u.u21;
    [[c * u.u11, c], [c * u.det(), c * u.u22]]
}

/// `Σ = (2/u₂₁²)·[[a₁₁, a₁₁u₂₂ - a₁₂u₂₁], [·, a₁₁u₂₂² - 2a₁₂u₂₁u₂₂ + a₂₂u₂₁²]]`.
pub fn noise_covariance(a: &Mat2, u: &UMatrix) -> Mat2 {
    let c = 2.0 / (u.u21 * u.u21);
    let (a11, a12, a22) = (a[0][0], a[0][1], a[1][1]);
    let s11 = c * a11;
    let s12 = c * (a11 * u.u22 - a12 * u.u21);
    let s22 = c * (a11 * u.u22 * u.u22 - 2.0 * a12 * u.u21 * u.u22 + a22 * u.u21 * u.u21);
    [[s11, s12], [s12, s22]]
}

/// Drive boundary coefficients and the coherent drive amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTerms {
    pub e1: f64,
    pub e2: f64,
    pub alpha_f: Complex64,
}

/// `e_k = ∫₀ᵗ v_k(s) E(s) ds` and
/// `α_f = (2Ω)^{-1/2} ∫₀ᵗ [Ω g(t-s) + i ġ(t-s)] E(s) ds`, trapezoidal on the grid.
pub fn drive_terms(gs: &GreensSolution, drive: &DriveSpec, spec: &BathSpec, n: usize) -> Result<DriveTerms> {
    let zero = DriveTerms {
        e1: 0.0,
        e2: 0.0,
        alpha_f: Complex64::new(0.0, 0.0),
    };
    if !drive.is_active() {
        return Ok(zero);
    }
    gs.check_caustic(n)?;
    let dt = gs.grid.step;
    let (mut conv_g, mut conv_gd, mut conv_h) = (0.0, 0.0, 0.0);
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 * dt } else { dt };
        let e = drive.force(gs.time(i)) * w;
        conv_g += gs.g[n - i] * e;
        conv_gd += gs.gdot[n - i] * e;
        conv_h += gs.h[n - i] * e;
    }
    let gt = gs.g[n];
    let ht = gs.h[n];
    let e1 = conv_g / gt;
    let e2 = conv_h - ht * conv_g / gt;
    let omega = spec.omega;
    let alpha_f = Complex64::new(omega * conv_g, conv_gd) / (2.0 * omega).sqrt();
    Ok(DriveTerms { e1, e2, alpha_f })
}

/// Precomputed Green functions and noise integrals for channels at any
/// node of one grid.
#[derive(Debug, Clone)]
pub struct ChannelPropagator {
    pub spec: BathSpec,
    pub drive: DriveSpec,
    pub greens: GreensSolution,
    pub weights: NoisePairWeights,
    pub noise: NoiseIntegrals,
}

impl ChannelPropagator {
    pub fn new(spec: &BathSpec, grid: TimeGrid, drive: &DriveSpec) -> Result<Self> {
        let greens = solve_fundamental(spec, grid)?;
        Ok(Self::from_greens(spec, greens, drive))
    }

    pub fn from_greens(spec: &BathSpec, greens: GreensSolution, drive: &DriveSpec) -> Self {
        let weights = NoisePairWeights::new(spec, greens.grid.step, greens.grid.count);
        let noise = NoiseIntegrals::accumulate(&greens, &weights);
        ChannelPropagator {
            spec: *spec,
            drive: *drive,
            greens,
            weights,
            noise,
        }
    }

    /// Channel at node n; node 0 is the identity.
    pub fn channel_at(&self, n: usize) -> Result<GaussianChannel> {
        if n == 0 {
            return Ok(GaussianChannel::identity());
        }
        let u = u_matrix(&self.greens, n)?;
        let a = self.noise.fluctuation_matrix(&self.greens, n)?;
        let phi = mean_map(&u);
        let sigma = noise_covariance(&a, &u);
        let dr = drive_terms(&self.greens, &self.drive, &self.spec, n)?;
        // ⟨R⟩ = Φ₁₁R₀ + Φ₁₂(P₀ + e₁), ⟨P⟩ = e₂ + Φ₂₁R₀ + Φ₂₂(P₀ + e₁)
        let drift = [phi[0][1] * dr.e1, dr.e2 + phi[1][1] * dr.e1];
        Ok(GaussianChannel {
            t: self.greens.time(n),
            phi,
            sigma,
            drift,
            alpha_f: dr.alpha_f,
        })
    }
}

/// Channel at the last node of `grid`.
pub fn assemble_channel(spec: &BathSpec, drive: &DriveSpec, grid: TimeGrid) -> Result<GaussianChannel> {
    ChannelPropagator::new(spec, grid, drive)?.channel_at(grid.count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{SpectralExponent, Temperature};

    fn spec(gamma: f64, cutoff: f64, t: Temperature) -> BathSpec {
        BathSpec::new(1.0, gamma, cutoff, SpectralExponent::Ohmic, t).unwrap()
    }

    #[test]
    fn free_channel_is_a_rotation() {
        let s = spec(0.0, 100.0, Temperature::Zero);
        let ch = assemble_channel(&s, &DriveSpec::none(), TimeGrid::new(1e-3, 1234).unwrap()).unwrap();
        let t = ch.t;
        let expect = [[t.cos(), t.sin()], [-t.sin(), t.cos()]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((ch.phi[i][j] - expect[i][j]).abs() < 1e-6);
                assert_eq!(ch.sigma[i][j], 0.0);
            }
        }
    }

    #[test]
    fn pair_weight_symmetry_and_total() {
        let s = spec(0.1, 20.0, Temperature::Finite { beta: 0.5 });
        let w = NoisePairWeights::new(&s, 0.01, 5);
        assert_eq!(w.get(true, false, -3), w.rl[3]);
        // Four shapes tile the unit square: Σ_XY E_XY(0) = h²∫∫N(h(u-u')).
        let total = w.rr[0] + w.rl[0] + w.lr[0] + w.ll[0];
        let rule = gauss_legendre(40).mapped(0.0, 1.0);
        let mut direct = 0.0;
        for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
            let inner = gauss_legendre(40).mapped(0.0, 1.0);
            for (v, wv) in inner.nodes.iter().zip(&inner.weights) {
                direct += wu * wv * noise_kernel(&s, 0.01 * (u - v));
            }
        }
        direct *= 1e-4;
        assert!((total - direct).abs() < 1e-10 * direct.abs());
    }

    #[test]
    fn incremental_matches_direct_double_sum() {
        let s = spec(0.1, 50.0, Temperature::Finite { beta: 1.5 });
        let gs = solve_fundamental(&s, TimeGrid::new(2e-3, 400).unwrap()).unwrap();
        let w = NoisePairWeights::new(&s, 2e-3, 400);
        let inc = NoiseIntegrals::accumulate(&gs, &w);
        for &n in &[57, 223, 400] {
            let a = inc.fluctuation_matrix(&gs, n).unwrap();
            let b = fluctuation_integrals(&gs, &w, n).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[i][j] - b[i][j]).abs() < 1e-10 * (1.0 + b[i][j].abs()), "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn constant_force_response() {
        let s = spec(0.0, 100.0, Temperature::Zero);
        let gs = solve_fundamental(&s, TimeGrid::new(1e-3, 2000).unwrap()).unwrap();
        let drive = DriveSpec::sinusoid(0.7, 0.0, 0.0).unwrap();
        let p = ChannelPropagator::from_greens(&s, gs, &drive);
        let ch = p.channel_at(2000).unwrap();
        let t = ch.t;
        assert!((ch.drift[0] - 0.7 * (1.0 - t.cos())).abs() < 1e-6);
        assert!((ch.drift[1] - 0.7 * t.sin()).abs() < 1e-6);
    }
}
