//! Fundamental solutions of the nonlocal equation of motion
//!
//! ```text
//! M₀ ü(t) + K₀ u(t) + 2 ∫₀ᵗ D(t-s) u(s) ds = 0
//! ```
//!
//! with `g(0)=0, ġ(0)=1` and `h(0)=1, ḣ(0)=0`, plus the boundary-value
//! solutions and the u-matrix built from them.
//!
//! The memory integral uses product integration: D is integrated exactly
//! over each step (16-point Gauss–Legendre) against a piecewise-linear
//! history, which resolves kernels much narrower than the step. Time
//! stepping is velocity Verlet. Because the Laplace transforms satisfy
//! `ĥ = z ĝ`, the stored `h` coincides with `ġ` up to discretization.

use crate::bath::{bare_parameters, dissipation_kernel, BareParams, BathSpec};
use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;
use std::io::Write;

/// Inner fixed-step grid `t_n = n·step`, `n = 0..=count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub step: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("grid step", format!("{step}")));
        }
        if count == 0 {
            return Err(invalid("grid count", "at least one step"));
        }
        Ok(TimeGrid { step, count })
    }

    /// Smallest grid with the given step that reaches `t_max`.
    pub fn covering(step: f64, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(invalid("t_max", format!("{t_max}")));
        }
        let count = (t_max / step - 1e-9).ceil().max(1.0) as usize;
        Self::new(step, count)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.step
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.count)
    }

    /// Index of the node closest to `t`, clamped to the grid.
    pub fn nearest(&self, t: f64) -> usize {
        ((t / self.step).round().max(0.0) as usize).min(self.count)
    }
}

/// Exact per-step integrals of a kernel against linear hat functions:
/// `w0[k] = ∫_{kh}^{(k+1)h} K(τ)(1-σ) dτ`, `w1[k] = ∫ K(τ) σ dτ`, σ = τ/h - k.
pub fn product_weights(kernel: impl Fn(f64) -> f64, step: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(16);
    let nodes: Vec<f64> = rule.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights: Vec<f64> = rule.weights.iter().map(|w| 0.5 * w * step).collect();
    let mut w0 = vec![0.0; count];
    let mut w1 = vec![0.0; count];
    for k in 0..count {
        let (mut a, mut b) = (0.0, 0.0);
        for (sigma, w) in nodes.iter().zip(&weights) {
            let kv = kernel((k as f64 + sigma) * step) * w;
            a += kv * (1.0 - sigma);
            b += kv * sigma;
        }
        w0[k] = a;
        w1[k] = b;
    }
    (w0, w1)
}

/// Sampled fundamental solutions on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensSolution {
    pub grid: TimeGrid,
    pub bare: BareParams,
    pub g: Vec<f64>,
    pub gdot: Vec<f64>,
    pub h: Vec<f64>,
    pub hdot: Vec<f64>,
    mem_w0: Vec<f64>,
    mem_w1: Vec<f64>,
}

/// Solve for `g` and `h` with the renormalized bare parameters of `spec`.
pub fn solve_fundamental(spec: &BathSpec, grid: TimeGrid) -> Result<GreensSolution> {
    solve_with_bare(spec, grid, bare_parameters(spec))
}

/// Same as [`solve_fundamental`] with explicit bare parameters.
pub fn solve_with_bare(spec: &BathSpec, grid: TimeGrid, bare: BareParams) -> Result<GreensSolution> {
    let dt = grid.step;
    if dt * spec.cutoff > 1.0 {
        return Err(Error::GridTooCoarse(format!(
            "step·Λ = {:.3} > 1 (step {dt} ns, Λ {} rad/ns); use step ≤ {:.3e}",
            dt * spec.cutoff,
            spec.cutoff,
            0.1 / spec.cutoff
        )));
    }
    let w_bare = bare.k0.abs().sqrt() / bare.mass0.sqrt();
    if dt * w_bare > 1.0 {
        return Err(Error::GridTooCoarse(format!(
            "step·ω₀ = {:.3} > 1 with bare frequency ω₀ = {w_bare:.4} rad/ns",
            dt * w_bare
        )));
    }
    if !(bare.mass0 > 0.0) {
        return Err(invalid("bare mass", format!("{}", bare.mass0)));
    }
    let n = grid.count;
    let (w0, w1) = if spec.gamma == 0.0 {
        (vec![0.0; n], vec![0.0; n])
    } else {
        product_weights(|t| dissipation_kernel(spec, t), dt, n)
    };
    let memoryless = spec.gamma == 0.0;

    let mut g = vec![0.0; n + 1];
    let mut gd = vec![0.0; n + 1];
    let mut h = vec![0.0; n + 1];
    let mut hd = vec![0.0; n + 1];
    g[0] = 0.0;
    gd[0] = 1.0;
    h[0] = 1.0;
    hd[0] = 0.0;
    let inv_m = 1.0 / bare.mass0;
    let mut ag = -bare.k0 * g[0] * inv_m;
    let mut ah = -bare.k0 * h[0] * inv_m;
    let half_dt2 = 0.5 * dt * dt;
    for m in 0..n {
        let j = m + 1;
        g[j] = g[m] + dt * gd[m] + half_dt2 * ag;
        h[j] = h[m] + dt * hd[m] + half_dt2 * ah;
        let (mg, mh) = if memoryless {
            (0.0, 0.0)
        } else {
            memory_pair(&w0, &w1, &g, &h, j)
        };
        let ag_new = -(bare.k0 * g[j] + 2.0 * mg) * inv_m;
        let ah_new = -(bare.k0 * h[j] + 2.0 * mh) * inv_m;
        gd[j] = gd[m] + 0.5 * dt * (ag + ag_new);
        hd[j] = hd[m] + 0.5 * dt * (ah + ah_new);
        ag = ag_new;
        ah = ah_new;
        if !(g[j].is_finite() && h[j].is_finite() && gd[j].is_finite() && hd[j].is_finite()) {
            return Err(Error::NonFinite("Green function integration"));
        }
    }
    Ok(GreensSolution {
        grid,
        bare,
        g,
        gdot: gd,
        h,
        hdot: hd,
        mem_w0: w0,
        mem_w1: w1,
    })
}

/// `Σ_{k<j} w0[k]·u[j-k] + w1[k]·u[j-k-1]` for two histories at once.
#[inline]
fn memory_pair(w0: &[f64], w1: &[f64], g: &[f64], h: &[f64], j: usize) -> (f64, f64) {
    let (mut sg, mut sh) = (0.0, 0.0);
    for k in 0..j {
        let a = w0[k];
        let b = w1[k];
        sg += a * g[j - k] + b * g[j - k - 1];
        sh += a * h[j - k] + b * h[j - k - 1];
    }
    (sg, sh)
}

fn memory_single(w0: &[f64], w1: &[f64], u: &[f64], j: usize) -> f64 {
    (0..j).map(|k| w0[k] * u[j - k] + w1[k] * u[j - k - 1]).sum()
}

impl GreensSolution {
    pub fn time(&self, n: usize) -> f64 {
        self.grid.time(n)
    }

    /// Largest relative residual of the equation of motion for a sampled
    /// trajectory `(u, u̇)`, with ü taken from central differences of u̇.
    pub fn residual(&self, u: &[f64], udot: &[f64]) -> f64 {
        let n = self.grid.count.min(u.len() - 1);
        let dt = self.grid.step;
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs())) * self.bare.k0.abs();
        let mut worst = 0.0f64;
        for j in 1..n {
            let acc = (udot[j + 1] - udot[j - 1]) / (2.0 * dt);
            let mem = memory_single(&self.mem_w0, &self.mem_w1, u, j);
            let r = self.bare.mass0 * acc + self.bare.k0 * u[j] + 2.0 * mem;
            worst = worst.max(r.abs());
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }

    /// Debug dump with columns `s, g, gdot, h, hdot`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "g", "gdot", "h", "hdot"])?;
        for i in 0..=self.grid.count {
            w.write_record([
                self.time(i).to_string(),
                self.g[i].to_string(),
                self.gdot[i].to_string(),
                self.h[i].to_string(),
                self.hdot[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fails with [`Error::Caustic`] if `|g(t_n)|` is tiny relative to the
    /// history of g.
    pub fn check_caustic(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Caustic { t: 0.0, g: 0.0 });
        }
        let scale = self.g[..=n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gt = self.g[n];
        if gt.abs() < CAUSTIC_RELATIVE_THRESHOLD * scale {
            return Err(Error::Caustic { t: self.time(n), g: gt });
        }
        Ok(())
    }
}

/// Relative size of `|g(t)|` below which the boundary problem is refused.
pub const CAUSTIC_RELATIVE_THRESHOLD: f64 = 1e-4;

/// Boundary-value solutions on `[0, t_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySolutions {
    pub index: usize,
    /// `u₁(s)`: 1 at s=0, 0 at s=t.
    pub u1: Vec<f64>,
    /// `u₂(s)`: 0 at s=0, 1 at s=t.
    pub u2: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

pub fn boundary_solutions(gs: &GreensSolution, n: usize) -> Result<BoundarySolutions> {
    gs.check_caustic(n)?;
    let gt = gs.g[n];
    let ht = gs.h[n];
    let mut u1: Vec<f64> = (0..=n).map(|i| gs.h[i] - ht * gs.g[i] / gt).collect();
    let mut u2: Vec<f64> = (0..=n).map(|i| gs.g[i] / gt).collect();
    u1[n] = 0.0;
    u2[n] = 1.0;
    u1[0] = 1.0;
    u2[0] = 0.0;
    let v1 = u2.iter().rev().copied().collect();
    let v2 = u1.iter().rev().copied().collect();
    Ok(BoundarySolutions { index: n, u1, u2, v1, v2 })
}

/// The 2×2 u-matrix `[[-M₀u̇₁(0), M₀u̇₁(t)], [-M₀u̇₂(0), M₀u̇₂(t)]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UMatrix {
    pub u11: f64,
    pub u12: f64,
    pub u21: f64,
    pub u22: f64,
}

impl UMatrix {
    pub fn det(&self) -> f64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }
}

/// Endpoint derivatives come from the stored `ġ`, `ḣ` samples.
pub fn u_matrix(gs: &GreensSolution, n: usize) -> Result<UMatrix> {
    gs.check_caustic(n)?;
    let m = gs.bare.mass0;
    let (gt, gdt, ht, hdt) = (gs.g[n], gs.gdot[n], gs.h[n], gs.hdot[n]);
    Ok(UMatrix {
        u11: m * ht / gt,
        u12: m * (hdt - ht * gdt / gt),
        u21: -m / gt,
        u22: m * gdt / gt,
    })
}
