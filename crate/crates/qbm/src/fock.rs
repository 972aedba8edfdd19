//! Polynomial × Gaussian characteristic functions and their Fock projection.
//!
//! A state is carried as its Wigner characteristic function
//!
//! ```text
//! χ(ξ) = p(ξ_R, ξ_P) · exp(-½ ξᵀQξ + i ℓᵀξ)
//! ```
//!
//! which is closed under Gaussian channels. For readout it is rewritten in
//! the complex variable z of `a = (√Ω R + iP/√Ω)/√2`, where
//! `ξ_R = √(2Ω) Re z` and `ξ_P = -√(2/Ω) Im z`, turned into the Q
//! characteristic function `χ_Q = e^{-|z|²/2} χ`, and integrated against
//! `⟨k|e^{-i z̄ a†} e^{-i z a}|l⟩`.

use crate::channel::{GaussianChannel, Mat2};
use crate::error::{Error, Result};
use crate::quadrature::gauss_hermite;
use num_complex::Complex64;

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Highest Fock index accepted for initial states.
pub const MAX_INITIAL_FOCK: usize = 4;

/// Dense bivariate polynomial with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    deg: usize,
    coef: Vec<C64>,
}

impl Poly2 {
    pub fn zero(deg: usize) -> Self {
        Poly2 {
            deg,
            coef: vec![C64::new(0.0, 0.0); (deg + 1) * (deg + 1)],
        }
    }

    pub fn constant(v: C64) -> Self {
        let mut p = Self::zero(0);
        p.coef[0] = v;
        p
    }

    /// `a·x₁ + b·x₂ + s`
    pub fn linear(a: C64, b: C64, s: C64) -> Self {
        let mut p = Self::zero(1);
        p.set(0, 0, s);
        p.set(1, 0, a);
        p.set(0, 1, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    fn idx(&self, m: usize, n: usize) -> usize {
        m * (self.deg + 1) + n
    }

    /// Coefficient of `x₁^m x₂^n`.
    pub fn coeff(&self, m: usize, n: usize) -> C64 {
        if m + n > self.deg {
            C64::new(0.0, 0.0)
        } else {
            self.coef[self.idx(m, n)]
        }
    }

    fn set(&mut self, m: usize, n: usize, v: C64) {
        let i = self.idx(m, n);
        self.coef[i] = v;
    }

    fn add_at(&mut self, m: usize, n: usize, v: C64) {
        let i = self.idx(m, n);
        self.coef[i] += v;
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let d = self.deg;
        (0..=d).flat_map(move |m| (0..=d - m).map(move |n| (m, n, self.coeff(m, n))))
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero(self.deg.max(other.deg));
        for (m, n, v) in self.terms().chain(other.terms()) {
            out.add_at(m, n, v);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Poly2 {
        Poly2 {
            deg: self.deg,
            coef: self.coef.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero(self.deg + other.deg);
        for (m, n, a) in self.terms() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (p, q, b) in other.terms() {
                out.add_at(m + p, n + q, a * b);
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Poly2 {
        let mut out = Poly2::constant(c(1.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x1: C64, x2: C64) -> C64 {
        // Horner in x₂ inside Horner in x₁.
        let d = self.deg;
        let mut acc = C64::new(0.0, 0.0);
        for m in (0..=d).rev() {
            let mut inner = C64::new(0.0, 0.0);
            for n in (0..=d - m).rev() {
                inner = inner * x2 + self.coeff(m, n);
            }
            acc = acc * x1 + inner;
        }
        acc
    }

    /// `p(A x + s)`.
    pub fn affine(&self, a: [[C64; 2]; 2], s: [C64; 2]) -> Poly2 {
        let l1 = Poly2::linear(a[0][0], a[0][1], s[0]);
        let l2 = Poly2::linear(a[1][0], a[1][1], s[1]);
        let mut p1 = vec![Poly2::constant(c(1.0))];
        let mut p2 = vec![Poly2::constant(c(1.0))];
        for k in 1..=self.deg {
            p1.push(p1[k - 1].mul(&l1));
            p2.push(p2[k - 1].mul(&l2));
        }
        let mut out = Poly2::zero(self.deg);
        for (m, n, v) in self.terms() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let t = p1[m].mul(&p2[n]);
            for (i, j, w) in t.terms() {
                out.add_at(i, j, v * w);
            }
        }
        out
    }

    /// `E[p(x + w)]` for a centred Gaussian w with covariance `g`.
    pub fn gaussian_smooth(&self, g: [[C64; 2]; 2]) -> Poly2 {
        let mu = gaussian_moments(g, self.deg);
        let binom = binomials(self.deg);
        let mut out = Poly2::zero(self.deg);
        for (m, n, v) in self.terms() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..=m {
                for j in 0..=n {
                    let e = mu[i][j];
                    if e == C64::new(0.0, 0.0) {
                        continue;
                    }
                    out.add_at(m - i, n - j, v * e * (binom[m][i] * binom[n][j]));
                }
            }
        }
        out
    }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j < i { b[i - 1][j] } else { 0.0 };
        }
    }
    b
}

/// `E[w₁^i w₂^j]` for `i + j ≤ deg`, by Stein's identity.
pub fn gaussian_moments(g: [[C64; 2]; 2], deg: usize) -> Vec<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    let mut mu = vec![vec![zero; deg + 1]; deg + 1];
    mu[0][0] = c(1.0);
    for j in 1..=deg {
        mu[0][j] = if j >= 2 { g[1][1] * (j as f64 - 1.0) * mu[0][j - 2] } else { zero };
    }
    for i in 1..=deg {
        for j in 0..=deg - i {
            let mut v = zero;
            if i >= 2 {
                v += g[0][0] * (i as f64 - 1.0) * mu[i - 2][j];
            }
            if j >= 1 {
                v += g[0][1] * j as f64 * mu[i - 1][j - 1];
            }
            mu[i][j] = v;
        }
    }
    mu
}

/// `⟨r| e^{α a†} e^{β a} |c⟩` as a number.
pub fn normal_ordered_element(r: usize, col: usize, alpha: C64, beta: C64) -> C64 {
    let (hi, lo, base) = if r >= col { (r, col, alpha) } else { (col, r, beta) };
    let d = hi - lo;
    let ab = alpha * beta;
    let mut sum = C64::new(0.0, 0.0);
    for m in 0..=lo {
        sum += ab.powu(m as u32) / (factorial(m) * factorial(d + m) * factorial(lo - m));
    }
    base.powu(d as u32) * (factorial(r) * factorial(col)).sqrt() * sum
}

/// Same element as a polynomial, with α and β given as polynomials.
fn normal_ordered_poly(r: usize, col: usize, alpha: &Poly2, beta: &Poly2) -> Poly2 {
    let (hi, lo, base) = if r >= col { (r, col, alpha) } else { (col, r, beta) };
    let d = hi - lo;
    let ab = alpha.mul(beta);
    let mut sum = Poly2::zero(0);
    let mut power = Poly2::constant(c(1.0));
    for m in 0..=lo {
        let w = 1.0 / (factorial(m) * factorial(d + m) * factorial(lo - m));
        sum = sum.add(&power.scale(c(w)));
        power = power.mul(&ab);
    }
    base.pow(d).mul(&sum).scale(c((factorial(r) * factorial(col)).sqrt()))
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// `z` and `z̄` as polynomials in `(Re z, Im z)`.
fn z_polys() -> (Poly2, Poly2) {
    (
        Poly2::linear(c(1.0), I, c(0.0)),
        Poly2::linear(c(1.0), -I, c(0.0)),
    )
}

/// Conversion between ξ and z coordinates for a given Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Frame {
    /// `ξ = diag(t₁, t₂) (Re z, Im z)`
    t1: f64,
    t2: f64,
}

impl Frame {
    fn new(omega: f64) -> Self {
        Frame {
            t1: (2.0 * omega).sqrt(),
            t2: -(2.0 / omega).sqrt(),
        }
    }
}

/// Wigner characteristic function `p(ξ)·exp(-½ξᵀQξ + iℓᵀξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussianChar {
    pub omega: f64,
    pub q: Mat2,
    pub lin: [C64; 2],
    pub poly: Poly2,
}

/// Ground-state Wigner covariance `diag(1/(2Ω), Ω/2)`.
pub fn ground_covariance(omega: f64) -> Mat2 {
    [[0.5 / omega, 0.0], [0.0, 0.5 * omega]]
}

/// Wigner characteristic function of `|k⟩⟨l|`.
pub fn initial_char(k: usize, l: usize, omega: f64) -> Result<PolyGaussianChar> {
    if k > MAX_INITIAL_FOCK || l > MAX_INITIAL_FOCK {
        return Err(Error::Unsupported(format!(
            "initial Fock index ({k}, {l}) above {MAX_INITIAL_FOCK}"
        )));
    }
    // χ = e^{-|z|²/2} ⟨l| e^{λa†} e^{-λ̄a} |k⟩ with λ = i z̄.
    let (z, zb) = z_polys();
    let lambda = zb.scale(I);
    let minus_lambda_bar = z.scale(I);
    let pz = normal_ordered_poly(l, k, &lambda, &minus_lambda_bar);
    let f = Frame::new(omega);
    let zero = c(0.0);
    let poly = pz.affine([[c(1.0 / f.t1), zero], [zero, c(1.0 / f.t2)]], [zero, zero]);
    Ok(PolyGaussianChar {
        omega,
        q: ground_covariance(omega),
        lin: [zero, zero],
        poly,
    })
}

/// Characteristic function of `Σ_kl ρ_kl |k⟩⟨l|` for a small density matrix.
pub fn char_from_density(rho: &[Vec<C64>], omega: f64) -> Result<PolyGaussianChar> {
    let mut out: Option<PolyGaussianChar> = None;
    for (k, row) in rho.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            if *v == C64::new(0.0, 0.0) {
                continue;
            }
            let ch = initial_char(k, l, omega)?;
            out = Some(match out {
                None => PolyGaussianChar {
                    poly: ch.poly.scale(*v),
                    ..ch
                },
                Some(acc) => PolyGaussianChar {
                    poly: acc.poly.add(&ch.poly.scale(*v)),
                    ..acc
                },
            });
        }
    }
    out.ok_or_else(|| Error::Unsupported("empty density matrix".into()))
}

/// Wigner characteristic function of `|ψ⟩⟨ψ|` for
/// `|ψ⟩ = cos(θ/2)|1⟩ + e^{iφ} sin(θ/2)|0⟩`, i.e. Bloch angles (θ, φ) in the
/// convention σ_z = ρ₁₁ - ρ₀₀.
pub fn bloch_char(theta: f64, phi: f64, omega: f64) -> Result<PolyGaussianChar> {
    let psi = [C64::from_polar((0.5 * theta).sin(), phi), c((0.5 * theta).cos())];
    let rho: Vec<Vec<C64>> = (0..2).map(|k| (0..2).map(|l| psi[k] * psi[l].conj()).collect()).collect();
    char_from_density(&rho, omega)
}

impl PolyGaussianChar {
    pub fn eval(&self, xi: [f64; 2]) -> C64 {
        let quad = xi[0] * (self.q[0][0] * xi[0] + self.q[0][1] * xi[1])
            + xi[1] * (self.q[1][0] * xi[0] + self.q[1][1] * xi[1]);
        let lin = self.lin[0] * xi[0] + self.lin[1] * xi[1];
        self.poly.eval(c(xi[0]), c(xi[1])) * (-0.5 * quad + I * lin).exp()
    }

    /// Gaussian part and polynomial in z coordinates: `(A, m, P)` with
    /// `χ = P(z) exp(-½zᵀAz + i mᵀz)`.
    fn in_z(&self) -> (Mat2, [C64; 2], Poly2) {
        let f = Frame::new(self.omega);
        let t = [f.t1, f.t2];
        let mut a = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = t[i] * self.q[i][j] * t[j];
            }
        }
        let m = [self.lin[0] * t[0], self.lin[1] * t[1]];
        let zero = c(0.0);
        let p = self.poly.affine([[c(t[0]), zero], [zero, c(t[1])]], [zero, zero]);
        (a, m, p)
    }

    /// Precision matrix of `χ_Q` in z coordinates and its inverse.
    fn q_gaussian(&self) -> Result<(Mat2, Mat2, f64, [C64; 2], Poly2)> {
        let (mut b, m, p) = self.in_z();
        b[0][0] += 1.0;
        b[1][1] += 1.0;
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        if !(b[0][0] > 0.0 && det > 0.0) {
            return Err(Error::NotIntegrable(format!("Q-function precision {b:?}")));
        }
        let g = [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
        Ok((b, g, det, m, p))
    }
}

/// `χ'(ξ) = χ(Φᵀξ) exp(-½ξᵀΣξ + i dᵀξ)`.
pub fn apply_channel(chi: &PolyGaussianChar, ch: &GaussianChannel) -> PolyGaussianChar {
    let p = &ch.phi;
    let pt = [[c(p[0][0]), c(p[1][0])], [c(p[0][1]), c(p[1][1])]];
    let poly = chi.poly.affine(pt, [c(0.0), c(0.0)]);
    let q = ch.evolve_covariance(&chi.q);
    let lin = [
        chi.lin[0] * p[0][0] + chi.lin[1] * p[0][1] + ch.drift[0],
        chi.lin[0] * p[1][0] + chi.lin[1] * p[1][1] + ch.drift[1],
    ];
    PolyGaussianChar {
        omega: chi.omega,
        q,
        lin,
        poly,
    }
}

fn to_c(m: &Mat2) -> [[C64; 2]; 2] {
    [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]]
}

fn mat_vec(g: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1]]
}

/// `ρ_kl` by exact Gaussian moments.
pub fn fock_element(chi: &PolyGaussianChar, k: usize, l: usize) -> Result<C64> {
    let (_, g, det, m, p) = chi.q_gaussian()?;
    let (z, zb) = z_polys();
    let mkl = normal_ordered_poly(k, l, &zb.scale(-I), &z.scale(-I));
    let integrand = p.mul(&mkl);
    let gm = mat_vec(&g, m);
    let mgm = m[0] * gm[0] + m[1] * gm[1];
    let shift = [I * gm[0], I * gm[1]];
    let smooth = integrand.gaussian_smooth(to_c(&g));
    Ok(2.0 / det.sqrt() * (-0.5 * mgm).exp() * smooth.eval(shift[0], shift[1]))
}

/// `ρ_kl` by tensor Gauss–Hermite quadrature after whitening the Q Gaussian.
///
/// Independent of the moment route; used as its oracle.
pub fn fock_element_quadrature(chi: &PolyGaussianChar, k: usize, l: usize, order: usize) -> Result<C64> {
    let (b, _, det, _, _) = chi.q_gaussian()?;
    // B = L Lᵀ, z = √2 L^{-T} y so that ½zᵀBz = |y|².
    let l11 = b[0][0].sqrt();
    let l21 = b[1][0] / l11;
    let l22 = (b[1][1] - l21 * l21).sqrt();
    let rule = gauss_hermite(order);
    let f = Frame::new(chi.omega);
    let mut sum = C64::new(0.0, 0.0);
    for (y1, w1) in rule.nodes.iter().zip(&rule.weights) {
        for (y2, w2) in rule.nodes.iter().zip(&rule.weights) {
            // Solve Lᵀ x = y.
            let x2 = y2 / l22;
            let x1 = (y1 - l21 * x2) / l11;
            let (zr, zi) = (std::f64::consts::SQRT_2 * x1, std::f64::consts::SQRT_2 * x2);
            let xi = [f.t1 * zr, f.t2 * zi];
            let quad = xi[0] * (chi.q[0][0] * xi[0] + chi.q[0][1] * xi[1])
                + xi[1] * (chi.q[1][0] * xi[0] + chi.q[1][1] * xi[1]);
            let lin = chi.lin[0] * xi[0] + chi.lin[1] * xi[1];
            let zz = zr * zr + zi * zi;
            let expo = -0.5 * quad - 0.5 * zz + y1 * y1 + y2 * y2 + I * lin;
            let zc = C64::new(zr, zi);
            let elem = normal_ordered_element(k, l, -I * zc.conj(), -I * zc);
            sum += w1 * w2 * chi.poly.eval(c(xi[0]), c(xi[1])) * elem * expo.exp();
        }
    }
    Ok(sum * 2.0 / det.sqrt() / std::f64::consts::PI)
}

/// All `ρ_kl` with `k, l ≤ cutoff` from the generating function
/// `⟨0|e^{xa} ρ e^{ya†}|0⟩ = Σ ρ_kl xᵏ yˡ / √(k! l!)`.
///
/// The Gaussian factor is expanded by a stable three-term recursion on
/// `√(k! l!)`-scaled Taylor coefficients; the polynomial prefactor is
/// convolved in afterwards.
pub fn fock_matrix(chi: &PolyGaussianChar, cutoff: usize) -> Result<Vec<Vec<C64>>> {
    let (_, g, det, m, p) = chi.q_gaussian()?;
    let gc = to_c(&g);
    let ex = [c(1.0), -I];
    let ey = [c(1.0), I];
    let quad = |u: [C64; 2], v: [C64; 2]| {
        u[0] * (gc[0][0] * v[0] + gc[0][1] * v[1]) + u[1] * (gc[1][0] * v[0] + gc[1][1] * v[1])
    };
    let gm = mat_vec(&g, m);
    let a_xx = -0.5 * quad(ex, ex);
    let a_yy = -0.5 * quad(ey, ey);
    let c_xy = c(1.0) - quad(ex, ey);
    let d_x = gm[0] * ex[0] + gm[1] * ex[1];
    let d_y = gm[0] * ey[0] + gm[1] * ey[1];
    let konst = -0.5 * (m[0] * gm[0] + m[1] * gm[1]);
    let pref = 2.0 / det.sqrt() * konst.exp();

    // R(x, y) = E_w[P(w + iGm - iG e_x x - iG e_y y)]
    let gex = mat_vec(&g, ex);
    let gey = mat_vec(&g, ey);
    let smooth = p.gaussian_smooth(gc);
    let r = smooth.affine(
        [[-I * gex[0], -I * gey[0]], [-I * gex[1], -I * gey[1]]],
        [I * gm[0], I * gm[1]],
    );

    let n = cutoff + 1;
    let zero = C64::new(0.0, 0.0);
    let mut ct = vec![vec![zero; n]; n];
    ct[0][0] = c(1.0);
    let sq: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt()).collect();
    for j in 0..n - 1 {
        let prev = if j >= 1 { ct[0][j - 1] } else { zero };
        ct[0][j + 1] = (2.0 * a_yy * sq[j] * prev + d_y * ct[0][j]) / sq[j + 1];
    }
    for i in 0..n - 1 {
        for j in 0..n {
            let mut v = d_x * ct[i][j];
            if i >= 1 {
                v += 2.0 * a_xx * sq[i] * ct[i - 1][j];
            }
            if j >= 1 {
                v += c_xy * sq[j] * ct[i][j - 1];
            }
            ct[i + 1][j] = v / sq[i + 1];
        }
    }
    // ρ_kl = pref Σ_pq R_pq √(k!/(k-p)!) √(l!/(l-q)!) c̃_{k-p, l-q}
    let deg = r.degree();
    let falling = |k: usize, p: usize| ((k - p + 1)..=k).fold(1.0, |a, v| a * v as f64).sqrt();
    let mut rho = vec![vec![zero; n]; n];
    for k in 0..n {
        for l in 0..n {
            let mut s = zero;
            for pp in 0..=deg.min(k) {
                for qq in 0..=(deg - pp).min(l) {
                    let rc = r.coeff(pp, qq);
                    if rc == zero {
                        continue;
                    }
                    s += rc * falling(k, pp) * falling(l, qq) * ct[k - pp][l - qq];
                }
            }
            rho[k][l] = pref * s;
        }
    }
    Ok(rho)
}

/// Two-level readout of an evolved state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBlock {
    pub rho00: f64,
    pub rho11: f64,
    pub rho01: C64,
    /// `Σ_{2≤k≤cutoff} ρ_kk`
    pub tail: f64,
    pub cutoff: usize,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl QubitBlock {
    /// Block from moment-route elements; tail summed up to `cutoff`.
    pub fn from_char(chi: &PolyGaussianChar, cutoff: usize) -> Result<Self> {
        let rho00 = fock_element(chi, 0, 0)?.re;
        let rho11 = fock_element(chi, 1, 1)?.re;
        let rho01 = fock_element(chi, 0, 1)?;
        let diag = fock_matrix(chi, cutoff.max(1))?;
        let tail = (2..=cutoff).map(|k| diag[k][k].re).sum();
        let (sx, sy, sz) = pauli_expectations(rho00, rho11, rho01);
        Ok(QubitBlock {
            rho00,
            rho11,
            rho01,
            tail,
            cutoff,
            sx,
            sy,
            sz,
        })
    }

    pub fn rho10(&self) -> C64 {
        self.rho01.conj()
    }

    /// Per-state leakage `1 - ρ₀₀ - ρ₁₁`.
    pub fn leakage(&self) -> f64 {
        1.0 - self.rho00 - self.rho11
    }

    /// `1 - Σ_{k≤cutoff} ρ_kk`
    pub fn truncation_error(&self) -> f64 {
        1.0 - self.rho00 - self.rho11 - self.tail
    }
}

/// `(σ_x, σ_y, σ_z) = (ρ₀₁+ρ₁₀, i(ρ₁₀-ρ₀₁), ρ₁₁-ρ₀₀)`.
pub fn pauli_expectations(rho00: f64, rho11: f64, rho01: C64) -> (f64, f64, f64) {
    (2.0 * rho01.re, 2.0 * rho01.im, rho11 - rho00)
}

/// Smallest cutoff (doubling from `start`) with `1 - Σ_{k≤cutoff} ρ_kk < tol`.
///
/// Returns the cutoff and the remaining tail; stops at `max_cutoff`.
pub fn auto_cutoff(chi: &PolyGaussianChar, start: usize, tol: f64, max_cutoff: usize) -> Result<(usize, f64)> {
    let mut cutoff = start.max(2);
    loop {
        let rho = fock_matrix(chi, cutoff)?;
        let rest = 1.0 - (0..=cutoff).map(|k| rho[k][k].re).sum::<f64>();
        if rest < tol || cutoff >= max_cutoff {
            return Ok((cutoff, rest));
        }
        cutoff = (cutoff * 2).min(max_cutoff);
    }
}

/// Coefficients `(a, b)` of `χ_Q = exp(-az² - āz̄² - 2b|z|² + ...)` for an
/// initial ground state pushed through `ch`.
pub fn coefficient_view(ch: &GaussianChannel, omega: f64) -> (C64, f64) {
    let v = ch.evolve_covariance(&ground_covariance(omega));
    let a = C64::new(omega * v[0][0] / 4.0 - v[1][1] / (4.0 * omega), 0.5 * v[0][1]);
    let b = omega * v[0][0] / 4.0 + v[1][1] / (4.0 * omega) + 0.25;
    (a, b)
}

/// Ground-state population `1/(2√(b² - |a|²))`.
pub fn ground_population_closed_form(a: C64, b: f64) -> f64 {
    0.5 / (b * b - a.norm_sqr()).sqrt()
}

/// First-excited population `1/(2√D) - b/(4 D^{3/2})`, `D = b² - |a|²`.
pub fn excited_population_closed_form(a: C64, b: f64) -> f64 {
    let d = b * b - a.norm_sqr();
    0.5 / d.sqrt() - b / (4.0 * d.powf(1.5))
}

/// Closed-form Pauli expressions in the coefficient view, for comparison
/// only. They are inconsistent at t=0 (σ_z(0) = -1 - 8ρ₁₁(0)), so nothing in
/// the pipeline depends on them.
pub fn pauli_coefficient_forms(ch: &GaussianChannel, omega: f64, s0: (f64, f64), rho11_0: f64) -> (f64, f64, f64) {
    let (a, b) = coefficient_view(ch, omega);
    let p = &ch.phi;
    let (c11, c12, c21, c22) = (p[0][0], p[0][1], p[1][0], p[1][1]);
    let d32 = (b * b - a.norm_sqr()).powf(1.5);
    let (sx0, sy0) = s0;
    let u = sx0 * c22 - sy0 * omega * c12;
    let w = sx0 * c21 / omega - sy0 * c11;
    let sx = -1.0 / (4.0 * d32) * (u * (a.re - b) + w * a.im);
    let sy = -1.0 / (4.0 * d32) * (w * (a.re + b) - u * a.im);
    let cap = (c11 * c11 + omega * omega * c12 * c12 + c21 * c21 / (omega * omega) + c22 * c22) / 8.0;
    // c is the Φ-only part of a: the coefficients with Σ = 0.
    let phi_only = GaussianChannel {
        sigma: [[0.0; 2]; 2],
        ..*ch
    };
    let (cc, _) = coefficient_view(&phi_only, omega);
    let re_ca = (cc.conj() * a).re;
    let sz = -b / (4.0 * d32)
        + rho11_0 / d32 * (re_ca - cap * b - cap / 2.0 + 1.5 * b * (re_ca - cap * b) / d32);
    (sx, sy, sz)
}

/// `Tr[P ρ(t)]` for every pure initial state of span{|0⟩, |1⟩}, from the
/// evolved images of `|k⟩⟨l|`, k, l ∈ {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceRetention {
    /// `T_kl = ρ₀₀ + ρ₁₁` of the image of `|k⟩⟨l|`.
    pub t: [[C64; 2]; 2],
}

impl SubspaceRetention {
    pub fn from_images(images: &[[PolyGaussianChar; 2]; 2]) -> Result<Self> {
        let mut t = [[C64::new(0.0, 0.0); 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                let ch = &images[k][l];
                t[k][l] = fock_element(ch, 0, 0)? + fock_element(ch, 1, 1)?;
            }
        }
        Ok(SubspaceRetention { t })
    }

    /// `Tr[Pρ]` for `|ψ⟩ = ψ₀|0⟩ + ψ₁|1⟩`.
    pub fn retention(&self, psi: [C64; 2]) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for k in 0..2 {
            for l in 0..2 {
                s += psi[k] * psi[l].conj() * self.t[k][l];
            }
        }
        s.re
    }

    /// `1 - min Tr[Pρ]` over a Fibonacci grid of `samples` Bloch vectors.
    pub fn leakage_min(&self, samples: usize) -> f64 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let mut best = f64::INFINITY;
        for i in 0..samples {
            let cz = 1.0 - (2.0 * i as f64 + 1.0) / samples as f64;
            let theta = cz.clamp(-1.0, 1.0).acos();
            let phi = golden * i as f64;
            let psi = [C64::from_polar((0.5 * theta).sin(), phi), c((0.5 * theta).cos())];
            best = best.min(self.retention(psi));
        }
        1.0 - best
    }

    /// `1 - λ_min(T)`, the exact minimum over all qubit states.
    pub fn leakage_min_exact(&self) -> f64 {
        let a = self.t[0][0].re;
        let d = self.t[1][1].re;
        let off = self.t[0][1];
        let lam = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + off.norm_sqr()).sqrt();
        1.0 - lam
    }
}
