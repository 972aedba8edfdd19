//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qbm::bath::{spectral_density, BathSpec, Temperature};
use qbm::channel::GaussianChannel;
use qbm::quadrature::adaptive_gk;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

/// `coth(w)` for Re w > 0, with a series near the origin.
fn coth(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        let w2 = w * w;
        return w.inv() + w / 3.0 - w * w2 / 45.0;
    }
    let e = (-2.0 * w).exp();
    (1.0 + e) / (1.0 - e)
}

/// `∫₀^∞ J(ω) c(ω) e^{iωt} dω / π` on the ray `ω = r e^{iθ}`, where
/// `c = coth(βω/2)` (1 at T=0). Re gives N(t), -Im gives D(t).
///
/// J is continued as `2Mγ ωˢ e^{-ω/Λ}`. θ = ½ atan(tΛ) keeps the
/// integrand smooth but still oscillating, so this is a genuine quadrature
/// rather than the closed form in disguise.
pub fn kernel_oracle(spec: &BathSpec, t: f64) -> (f64, f64) {
    let d = -ray_integral(spec, t, false).im;
    let n = ray_integral(spec, t, true).re;
    (d, n)
}

fn ray_integral(spec: &BathSpec, t: f64, thermal: bool) -> Complex64 {
    let a = 1.0 / spec.cutoff;
    let theta = 0.5 * (t / a).atan();
    let dir = Complex64::from_polar(1.0, theta);
    let s = spec.exponent.s();
    let pref = 2.0 * spec.mass * spec.gamma;
    let beta = if thermal { spec.temperature.beta() } else { None };
    let f = |r: f64| -> Complex64 {
        let w = dir * r;
        let mut v = w.powi(s) * (-w * a + Complex64::new(0.0, t) * w).exp() * pref;
        if let Some(b) = beta {
            v *= coth(w * (0.5 * b));
        }
        v * dir / PI
    };
    let decay = a * theta.cos() + t * theta.sin();
    let r_max = 60.0 / decay + 40.0 * (s as f64) / decay;
    adaptive_gk(f, 0.0, r_max, 0.0, 1e-13, 20_000).value
}

/// Same integrals on the real axis, for small t where the ray is nearly real.
pub fn kernel_oracle_real_axis(spec: &BathSpec, t: f64) -> (f64, f64) {
    let beta = spec.temperature.beta();
    let fd = |w: f64| -spectral_density(spec, w).unwrap() * (w * t).sin() / PI;
    let fnn = |w: f64| {
        let c = match beta {
            Some(b) if w > 0.0 => 1.0 / (0.5 * b * w).tanh(),
            _ => 1.0,
        };
        spectral_density(spec, w).unwrap() * c * (w * t).cos() / PI
    };
    let top = spec.cutoff * 60.0;
    let d = adaptive_gk(fd, 0.0, top, 0.0, 1e-13, 50_000).value;
    let n = adaptive_gk(fnn, 0.0, top, 0.0, 1e-13, 50_000).value;
    (d, n)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random channel with PSD Σ and moderate drift.
pub fn random_channel(r: &mut StdRng) -> GaussianChannel {
    let mut ch = GaussianChannel::identity();
    for i in 0..2 {
        for j in 0..2 {
            ch.phi[i][j] = r.gen_range(-1.2..1.2);
        }
    }
    let l = [[r.gen_range(0.0..0.8), 0.0], [r.gen_range(-0.5..0.5), r.gen_range(0.0..0.8)]];
    for i in 0..2 {
        for j in 0..2 {
            ch.sigma[i][j] = l[i][0] * l[j][0] + l[i][1] * l[j][1];
        }
    }
    ch.drift = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
    ch
}

pub fn is_zero_temperature(spec: &BathSpec) -> bool {
    spec.temperature == Temperature::Zero
}

/// Relative error with a floor for values that cross zero.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Generalized Laguerre `L_n^{(a)}(x)` by the three-term recursion.
pub fn laguerre(n: usize, a: usize, x: f64) -> f64 {
    let a = a as f64;
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + a - x) * l1 - (k + a) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `⟨k|D(β)|l⟩`.
pub fn displacement_element(k: usize, l: usize, beta: Complex64) -> Complex64 {
    let x = beta.norm_sqr();
    let g = (-0.5 * x).exp();
    if k >= l {
        beta.powu((k - l) as u32) * ((factorial(l) / factorial(k)).sqrt() * g * laguerre(l, k - l, x))
    } else {
        (-beta.conj()).powu((l - k) as u32) * ((factorial(k) / factorial(l)).sqrt() * g * laguerre(k, l - k, x))
    }
}

/// Density matrix elements `ρ_kl = (2π)⁻¹ ∫ χ(ξ) ⟨k|e^{-iξ·(R,P)}|l⟩ d²ξ` for
/// `k, l ≤ n`, by the trapezoid rule on a square box. `chi` evaluates the
/// Wigner characteristic function `Tr[ρ e^{iξ·(R,P)}]`.
pub fn weyl_inversion(chi: impl Fn([f64; 2]) -> Complex64, omega: f64, n: usize, half_width: [f64; 2], pts: usize) -> Vec<Vec<Complex64>> {
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    let h = [2.0 * half_width[0] / pts as f64, 2.0 * half_width[1] / pts as f64];
    for i in 0..=pts {
        let x1 = -half_width[0] + h[0] * i as f64;
        for j in 0..=pts {
            let x2 = -half_width[1] + h[1] * j as f64;
            let v = chi([x1, x2]);
            if v.norm() < 1e-300 {
                continue;
            }
            // e^{-iξ·X} = D(β), β = -iξ₁/√(2Ω) + ξ₂√(Ω/2)
            let beta = Complex64::new(x2 * (0.5 * omega).sqrt(), -x1 / (2.0 * omega).sqrt());
            for k in 0..=n {
                for l in 0..=n {
                    rho[k][l] += v * displacement_element(k, l, beta);
                }
            }
        }
    }
    let w = h[0] * h[1] / (2.0 * PI);
    for row in rho.iter_mut() {
        for v in row.iter_mut() {
            *v *= w;
        }
    }
    rho
}

/// A random completely positive channel: attenuated phase-space rotation
/// and squeeze plus environment noise at or above the vacuum floor.
pub fn random_physical_channel(r: &mut StdRng, omega: f64) -> GaussianChannel {
    let eta: f64 = r.gen_range(0.2..1.0);
    let th: f64 = r.gen_range(0.0..2.0 * PI);
    let sq: f64 = r.gen_range(-0.4..0.4f64).exp();
    let n_env: f64 = r.gen_range(0.0..1.5);
    // Rotate in (√Ω R, P/√Ω), then squeeze, all symplectic.
    let (c, s) = (th.cos(), th.sin());
    let rot = [[c, s / omega], [-s * omega, c]];
    let k = eta.sqrt();
    let mut ch = GaussianChannel::identity();
    ch.phi = [[k * sq * rot[0][0], k * sq * rot[0][1]], [k * rot[1][0] / sq, k * rot[1][1] / sq]];
    let v = (1.0 - eta) * (2.0 * n_env + 1.0);
    ch.sigma = [[v * 0.5 / omega, 0.0], [0.0, v * 0.5 * omega]];
    ch.drift = [r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8)];
    ch
}
