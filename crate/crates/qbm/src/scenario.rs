//! Scenario configuration, execution and output.
//!
//! A config is a flat key/value TOML document with `schema = 1`. Lab units:
//! frequencies in GHz (taken one-to-one as rad/ns), times in ns,
//! temperature in mK.

use crate::bath::{BathSpec, SpectralExponent, Temperature};
use crate::channel::{ChannelPropagator, DriveSpec, GaussianChannel, Waveform};
use crate::error::{invalid, Error, Result};
use crate::fock::{
    apply_channel, bloch_char, coefficient_view, fock_matrix, initial_char, pauli_expectations, PolyGaussianChar, QubitBlock,
    SubspaceRetention,
};
use crate::greens::{solve_fundamental, GreensSolution, TimeGrid, CAUSTIC_RELATIVE_THRESHOLD};
use crate::markov::{lindblad_mls_evolve, optical_bloch_rwa, BlochVector, DensityMatrix, LindbladSpec, MlsTrajectory};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const SCHEMA_VERSION: u32 = 1;

/// Tail probability beyond the Fock cutoff that triggers a raise.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Ceiling for the automatic Fock cutoff raise.
pub const MAX_FOCK_CUTOFF: usize = 400;

/// Initial oscillator state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialState {
    /// `|k⟩`, k ≤ 4.
    Fock(usize),
    /// `cos(θ/2)|1⟩ + e^{iφ} sin(θ/2)|0⟩`
    Bloch { theta: f64, phi: f64 },
}

impl InitialState {
    /// Amplitudes on `|0⟩, |1⟩, ...`.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        match *self {
            InitialState::Fock(k) => {
                let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
                v[k] = Complex64::new(1.0, 0.0);
                v
            }
            InitialState::Bloch { theta, phi } => vec![
                Complex64::from_polar((0.5 * theta).sin(), phi),
                Complex64::new((0.5 * theta).cos(), 0.0),
            ],
        }
    }

    pub fn characteristic(&self, omega: f64) -> Result<PolyGaussianChar> {
        match *self {
            InitialState::Fock(k) => initial_char(k, k, omega),
            InitialState::Bloch { theta, phi } => bloch_char(theta, phi, omega),
        }
    }

    /// Bloch vector of the state's qubit block (zero for k ≥ 2).
    pub fn bloch_vector(&self) -> BlochVector {
        match *self {
            InitialState::Fock(0) => [0.0, 0.0, -1.0],
            InitialState::Fock(1) => [0.0, 0.0, 1.0],
            InitialState::Fock(_) => [0.0, 0.0, 0.0],
            InitialState::Bloch { theta, phi } => [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Fock(k) => write!(f, "fock:{k}"),
            InitialState::Bloch { theta, phi } => write!(f, "bloch:{theta},{phi}"),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("initial state `{s}`: expected fock:<k> or bloch:<theta>,<phi>"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "fock" => {
                let k: usize = rest.trim().parse().map_err(|_| bad())?;
                if k > crate::fock::MAX_INITIAL_FOCK {
                    return Err(Error::Config(format!("initial Fock level {k} above 4")));
                }
                Ok(InitialState::Fock(k))
            }
            "bloch" => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                let theta: f64 = a.trim().parse().map_err(|_| bad())?;
                let phi: f64 = b.trim().parse().map_err(|_| bad())?;
                if !theta.is_finite() || !phi.is_finite() {
                    return Err(bad());
                }
                Ok(InitialState::Bloch { theta, phi })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for InitialState {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Everything a run needs. Field names are the config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    pub omega_ghz: f64,
    pub gamma_ghz: f64,
    pub cutoff_ghz: f64,
    /// 1 (Ohmic) or 3 (supra-Ohmic).
    pub exponent: u32,
    pub temperature_mk: f64,
    pub drive: Waveform,
    pub drive_amplitude: f64,
    pub drive_frequency_ghz: f64,
    pub drive_phase: f64,
    pub initial: InitialState,
    pub t_max_ns: f64,
    pub output_points: usize,
    pub spacing: Spacing,
    /// First nonzero output time for log spacing.
    pub t_min_ns: f64,
    pub grid_step_ns: f64,
    pub fock_cutoff: usize,
    pub leakage_samples: usize,
    pub markov_mls: bool,
    pub bloch_rwa: bool,
    pub greens_dump: bool,
    pub csv_only: bool,
    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            schema: SCHEMA_VERSION,
            name: "custom".into(),
            omega_ghz: 1.0,
            gamma_ghz: 0.1,
            cutoff_ghz: 100.0,
            exponent: 1,
            temperature_mk: 50.0,
            drive: Waveform::None,
            drive_amplitude: 0.0,
            drive_frequency_ghz: 0.0,
            drive_phase: 0.0,
            initial: InitialState::Fock(1),
            t_max_ns: 20.0,
            output_points: 400,
            spacing: Spacing::Linear,
            t_min_ns: 1e-3,
            grid_step_ns: 1e-3,
            fock_cutoff: 40,
            leakage_samples: 64,
            markov_mls: true,
            bloch_rwa: false,
            greens_dump: false,
            csv_only: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Built-in figure scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(Error::Config(format!("unknown preset `{s}`"))),
        }
    }
}

impl Preset {
    pub fn config(self) -> ScenarioConfig {
        let base = ScenarioConfig::default();
        match self {
            Preset::Fig1 => ScenarioConfig {
                name: "fig1".into(),
                ..base
            },
            Preset::Fig2 => ScenarioConfig {
                name: "fig2".into(),
                temperature_mk: 0.0,
                ..base
            },
            Preset::Fig3 => ScenarioConfig {
                name: "fig3".into(),
                omega_ghz: 1.5,
                exponent: 3,
                temperature_mk: 10.0,
                t_max_ns: 10.0,
                spacing: Spacing::Log,
                t_min_ns: 1e-3,
                grid_step_ns: 5e-4,
                ..base
            },
            Preset::Fig4 => ScenarioConfig {
                name: "fig4".into(),
                omega_ghz: 1.5,
                temperature_mk: 10.0,
                drive: Waveform::Sinusoid,
                drive_amplitude: 1.0,
                drive_frequency_ghz: 1.5,
                ..base
            },
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        let nonneg = [
            ("omega_ghz", self.omega_ghz),
            ("gamma_ghz", self.gamma_ghz),
            ("cutoff_ghz", self.cutoff_ghz),
            ("temperature_mk", self.temperature_mk),
            ("drive_amplitude", self.drive_amplitude),
            ("drive_frequency_ghz", self.drive_frequency_ghz),
            ("t_max_ns", self.t_max_ns),
            ("t_min_ns", self.t_min_ns),
            ("grid_step_ns", self.grid_step_ns),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be finite and nonnegative")));
            }
        }
        if !self.drive_phase.is_finite() {
            return Err(invalid("drive_phase", "must be finite"));
        }
        if self.output_points < 2 {
            return Err(invalid("output_points", "need at least 2"));
        }
        if self.spacing == Spacing::Log && !(self.t_min_ns > 0.0 && self.t_min_ns < self.t_max_ns) {
            return Err(invalid("t_min_ns", "log spacing needs 0 < t_min < t_max"));
        }
        if self.fock_cutoff < 10 {
            return Err(invalid("fock_cutoff", "need at least 10"));
        }
        SpectralExponent::try_from(self.exponent)?;
        Ok(())
    }

    /// Lab units to internal ones: GHz → rad/ns, mK → β.
    pub fn convert_units(&self) -> Result<(BathSpec, DriveSpec)> {
        self.validate()?;
        let spec = BathSpec::new(
            self.omega_ghz,
            self.gamma_ghz,
            self.cutoff_ghz,
            SpectralExponent::try_from(self.exponent)?,
            Temperature::from_millikelvin(self.temperature_mk)?,
        )?;
        let drive = match self.drive {
            Waveform::None => DriveSpec::none(),
            Waveform::Sinusoid => DriveSpec::sinusoid(self.drive_amplitude, self.drive_frequency_ghz, self.drive_phase)?,
        };
        Ok((spec, drive))
    }

    /// Requested output times before snapping, t=0 first.
    pub fn requested_times(&self) -> Vec<f64> {
        let n = self.output_points;
        match self.spacing {
            Spacing::Linear => (0..n).map(|i| self.t_max_ns * i as f64 / (n - 1) as f64).collect(),
            Spacing::Log => {
                let (a, b) = (self.t_min_ns.ln(), self.t_max_ns.ln());
                std::iter::once(0.0)
                    .chain((0..n - 1).map(|i| (a + (b - a) * i as f64 / (n - 2).max(1) as f64).exp()))
                    .collect()
            }
        }
    }
}

/// Grid nodes for the requested times: snapped, deduplicated, and moved off
/// caustics to the nearest regular node.
pub fn output_nodes(cfg: &ScenarioConfig, greens: &GreensSolution) -> Vec<usize> {
    let grid = greens.grid;
    let mut nodes: Vec<usize> = cfg.requested_times().iter().map(|&t| grid.nearest(t)).collect();
    for n in nodes.iter_mut().filter(|n| **n > 0) {
        if greens.check_caustic(*n).is_err() {
            if let Some(m) = (1..grid.count).flat_map(|d| [n.checked_sub(d), Some(*n + d)]).flatten().find(|&m| {
                m > 0 && m <= grid.count && greens.check_caustic(m).is_ok()
            }) {
                log::warn!(
                    "output time {} ns is a caustic (|g| < {CAUSTIC_RELATIVE_THRESHOLD:e}·max); using {} ns",
                    grid.time(*n),
                    grid.time(m)
                );
                *n = m;
            }
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// One output time of the exact dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPoint {
    pub t: f64,
    pub channel: GaussianChannel,
    pub block: QubitBlock,
    /// Minimized leakage over the Fibonacci grid of qubit states.
    pub leakage_min: f64,
    /// `1 - λ_min` of the retention matrix.
    pub leakage_min_exact: f64,
    /// `b² - |a|²` of an evolved ground state.
    pub purity_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub config: ScenarioConfig,
    pub spec: BathSpec,
    pub drive: DriveSpec,
    pub exact: Vec<ExactPoint>,
    pub markov: Option<MlsTrajectory>,
    pub rwa: Option<Vec<BlochVector>>,
    pub greens: GreensSolution,
}

impl ResultSet {
    pub fn times(&self) -> Vec<f64> {
        self.exact.iter().map(|p| p.t).collect()
    }
}

/// Fock readout with the cutoff raised (doubling) until the tail is below
/// [`TAIL_TOLERANCE`] or [`MAX_FOCK_CUTOFF`] is reached.
pub fn project_with_auto_cutoff(chi: &PolyGaussianChar, start: usize) -> Result<QubitBlock> {
    let mut cutoff = start;
    loop {
        let block = QubitBlock::from_char(chi, cutoff)?;
        if block.truncation_error() < TAIL_TOLERANCE || cutoff >= MAX_FOCK_CUTOFF {
            return Ok(block);
        }
        cutoff = (cutoff * 2).min(MAX_FOCK_CUTOFF);
    }
}

fn initial_block(state: &InitialState, cutoff: usize) -> QubitBlock {
    let psi = state.amplitudes();
    let amp = |k: usize| psi.get(k).copied().unwrap_or_default();
    let (rho00, rho11, rho01) = (amp(0).norm_sqr(), amp(1).norm_sqr(), amp(0) * amp(1).conj());
    let (sx, sy, sz) = pauli_expectations(rho00, rho11, rho01);
    QubitBlock {
        rho00,
        rho11,
        rho01,
        tail: psi.iter().skip(2).map(|a| a.norm_sqr()).sum(),
        cutoff,
        sx,
        sy,
        sz,
    }
}

/// Full pipeline for one scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ResultSet> {
    let (spec, drive) = cfg.convert_units()?;
    let grid = TimeGrid::covering(cfg.grid_step_ns, cfg.t_max_ns)?;
    let greens = solve_fundamental(&spec, grid)?;
    let nodes = output_nodes(cfg, &greens);
    let prop = ChannelPropagator::from_greens(&spec, greens, &drive);

    let omega = spec.omega;
    let chi0 = cfg.initial.characteristic(omega)?;
    let basis: Vec<Vec<PolyGaussianChar>> = (0..2)
        .map(|k| (0..2).map(|l| initial_char(k, l, omega)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let mut exact = Vec::with_capacity(nodes.len());
    let mut saturated = (0usize, 0.0f64);
    for &n in &nodes {
        let ch = prop.channel_at(n)?;
        // The t=0 channel is the identity; read the block off the amplitudes
        // instead of through the frame scaling, which rounds.
        let block = if n == 0 {
            initial_block(&cfg.initial, cfg.fock_cutoff)
        } else {
            project_with_auto_cutoff(&apply_channel(&chi0, &ch), cfg.fock_cutoff)?
        };
        let images = [
            [apply_channel(&basis[0][0], &ch), apply_channel(&basis[0][1], &ch)],
            [apply_channel(&basis[1][0], &ch), apply_channel(&basis[1][1], &ch)],
        ];
        if block.truncation_error() >= TAIL_TOLERANCE {
            saturated = (saturated.0 + 1, saturated.1.max(block.truncation_error()));
        }
        let ret = SubspaceRetention::from_images(&images)?;
        let (a, b) = coefficient_view(&ch, omega);
        exact.push(ExactPoint {
            t: prop.greens.time(n),
            channel: ch,
            block,
            leakage_min: if cfg.leakage_samples > 0 { ret.leakage_min(cfg.leakage_samples) } else { f64::NAN },
            leakage_min_exact: ret.leakage_min_exact(),
            purity_gap: b * b - a.norm_sqr(),
        });
    }
    if saturated.0 > 0 {
        log::warn!(
            "Fock cutoff {MAX_FOCK_CUTOFF} reached at {} of {} output times; largest tail {:.2e}",
            saturated.0,
            exact.len(),
            saturated.1
        );
    }
    let times: Vec<f64> = exact.iter().map(|p| p.t).collect();

    let markov = if cfg.markov_mls {
        let lspec = LindbladSpec::from_bath(&spec, cfg.fock_cutoff)?.with_drive(drive);
        let rho0 = DensityMatrix::pure(cfg.fock_cutoff, &cfg.initial.amplitudes())?;
        Some(lindblad_mls_evolve(&lspec, &rho0, &times)?)
    } else {
        None
    };
    let rwa = if cfg.bloch_rwa {
        let lspec = LindbladSpec::from_bath(&spec, 2)?.with_drive(drive);
        Some(optical_bloch_rwa(&lspec, cfg.initial.bloch_vector(), &times)?)
    } else {
        None
    };

    Ok(ResultSet {
        config: cfg.clone(),
        spec,
        drive,
        exact,
        markov,
        rwa,
        greens: prop.greens,
    })
}

/// Column names of the main CSV.
pub fn csv_header(results: &ResultSet) -> Vec<&'static str> {
    let mut h = vec![
        "t_ns", "rho00", "rho11", "re_rho01", "im_rho01", "sx", "sy", "sz", "leakage",
    ];
    if results.markov.is_some() {
        h.extend(["markov_rho00", "markov_rho11", "markov_re_rho01", "markov_im_rho01", "markov_leakage"]);
    }
    if results.rwa.is_some() {
        h.extend(["rwa_sx", "rwa_sy", "rwa_sz"]);
    }
    h
}

/// Main table: one row per output time.
pub fn write_csv<W: Write>(results: &ResultSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(results))?;
    for (i, p) in results.exact.iter().enumerate() {
        let b = &p.block;
        let mut row = vec![p.t, b.rho00, b.rho11, b.rho01.re, b.rho01.im, b.sx, b.sy, b.sz, b.leakage()];
        if let Some(m) = &results.markov {
            row.extend([m.rho00[i], m.rho11[i], m.rho01[i].re, m.rho01[i].im, m.leakage(i)]);
        }
        if let Some(r) = &results.rwa {
            row.extend(r[i]);
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Leakage table: per-state and minimized over qubit initial states.
pub fn write_leakage_csv<W: Write>(results: &ResultSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_ns", "leakage", "leakage_min", "leakage_min_exact", "fock_cutoff"])?;
    for p in &results.exact {
        w.write_record([
            p.t.to_string(),
            p.block.leakage().to_string(),
            p.leakage_min.to_string(),
            p.leakage_min_exact.to_string(),
            p.block.cutoff.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A named polyline for [`svg_plot`].
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

/// Static line plot; `log_x` uses a base-10 time axis and drops t ≤ 0.
pub fn svg_plot(title: &str, series: &[Series<'_>], log_x: bool) -> String {
    let (w, h, ml, mr, mt, mb) = (720.0, 440.0, 70.0, 160.0, 40.0, 50.0);
    let fx = |x: f64| if log_x { x.log10() } else { x };
    let pts = |s: &Series<'_>| -> Vec<(f64, f64)> {
        s.points
            .iter()
            .filter(|(x, y)| y.is_finite() && (!log_x || *x > 0.0))
            .map(|&(x, y)| (fx(x), y))
            .collect()
    };
    let all: Vec<(f64, f64)> = series.iter().flat_map(pts).collect();
    let span = |v: Vec<f64>| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(all.iter().map(|p| p.0).collect());
    let (y0, y1) = span(all.iter().map(|p| p.1).collect());
    let (y0, y1) = (y0.min(0.0), y1.max(1.0));
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
        ml,
        escape(title)
    ));
    s.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        w - ml - mr,
        h - mt - mb
    ));
    // Ticks
    let xt: Vec<f64> = if log_x {
        (x0.floor() as i32..=x1.ceil() as i32).map(f64::from).filter(|v| *v >= x0 - 1e-9 && *v <= x1 + 1e-9).collect()
    } else {
        (0..=5).map(|i| x0 + (x1 - x0) * i as f64 / 5.0).collect()
    };
    for x in xt {
        let label = if log_x { format!("1e{}", x as i32) } else { format!("{x:.3}") };
        s.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1}\" x2=\"{0:.2}\" y2=\"{2}\" stroke=\"black\"/><text x=\"{0:.2}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{4}</text>\n",
            px(x),
            h - mb,
            h - mb + 5.0,
            h - mb + 18.0,
            label
        ));
    }
    for i in 0..=5 {
        let y = y0 + (y1 - y0) * i as f64 / 5.0;
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1:.2}\" x2=\"{2}\" y2=\"{1:.2}\" stroke=\"black\"/><text x=\"{3}\" y=\"{4:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{5:.3}</text>\n",
            ml - 5.0,
            py(y),
            ml,
            ml - 8.0,
            py(y) + 4.0,
            y
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t [ns]</text>\n",
        ml + 0.5 * (w - ml - mr),
        h - 12.0
    ));
    for (k, ser) in series.iter().enumerate() {
        let path: Vec<String> = pts(ser).iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let dash = if ser.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n",
            ser.color,
            dash,
            path.join(" ")
        ));
        let ly = mt + 16.0 + 18.0 * k as f64;
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"1.5\"{4}/><text x=\"{5}\" y=\"{6}\" font-family=\"sans-serif\" font-size=\"12\">{7}</text>\n",
            w - mr + 10.0,
            ly,
            w - mr + 40.0,
            ser.color,
            dash,
            w - mr + 46.0,
            ly + 4.0,
            escape(ser.label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn plot_series(results: &ResultSet) -> Vec<Series<'static>> {
    let t = results.times();
    let col = |f: &dyn Fn(&ExactPoint) -> f64| t.iter().cloned().zip(results.exact.iter().map(f)).collect();
    let mut out = vec![
        Series { label: "rho11 exact", color: "#c0392b", dashed: false, points: col(&|p| p.block.rho11) },
        Series { label: "rho00 exact", color: "#2471a3", dashed: false, points: col(&|p| p.block.rho00) },
        Series { label: "leakage", color: "#117a65", dashed: false, points: col(&|p| p.block.leakage()) },
    ];
    if let Some(m) = &results.markov {
        out.push(Series {
            label: "rho11 Markov",
            color: "#c0392b",
            dashed: true,
            points: t.iter().cloned().zip(m.rho11.iter().cloned()).collect(),
        });
        out.push(Series {
            label: "rho00 Markov",
            color: "#2471a3",
            dashed: true,
            points: t.iter().cloned().zip(m.rho00.iter().cloned()).collect(),
        });
    }
    if let Some(r) = &results.rwa {
        out.push(Series {
            label: "rho11 RWA",
            color: "#7d3c98",
            dashed: true,
            points: t.iter().cloned().zip(r.iter().map(|s| 0.5 * (1.0 + s[2]))).collect(),
        });
    }
    out
}

/// Write CSV tables, and unless `csv_only` the two SVG plots and optional
/// Green-function dump, into `dir`. Returns the written paths.
pub fn emit_outputs(results: &ResultSet, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let name = &results.config.name;
    let mut written = Vec::new();
    let path = dir.join(format!("{name}.csv"));
    write_csv(results, fs::File::create(&path)?)?;
    written.push(path);
    let path = dir.join(format!("{name}_leakage.csv"));
    write_leakage_csv(results, fs::File::create(&path)?)?;
    written.push(path);
    if results.config.greens_dump {
        let path = dir.join(format!("{name}_greens.csv"));
        results.greens.write_csv(fs::File::create(&path)?)?;
        written.push(path);
    }
    if !results.config.csv_only {
        let series = plot_series(results);
        for (suffix, log_x) in [("linear", false), ("log", true)] {
            let path = dir.join(format!("{name}_{suffix}.svg"));
            fs::write(&path, svg_plot(&format!("{name}: populations and leakage"), &series, log_x))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `ρ_kk` sum at a fixed cutoff, for normalization checks.
pub fn normalization_at(chi: &PolyGaussianChar, cutoff: usize) -> Result<f64> {
    let rho = fock_matrix(chi, cutoff)?;
    Ok((0..=cutoff).map(|k| rho[k][k].re).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_strings() {
        assert_eq!("fock:1".parse::<InitialState>().unwrap(), InitialState::Fock(1));
        let b: InitialState = "bloch:1.5,0.25".parse().unwrap();
        assert_eq!(b, InitialState::Bloch { theta: 1.5, phi: 0.25 });
        assert_eq!(b.to_string().parse::<InitialState>().unwrap(), b);
        assert!("fock:7".parse::<InitialState>().is_err());
        assert!("coherent:1".parse::<InitialState>().is_err());
    }

    #[test]
    fn unit_conversion() {
        let (spec, _) = Preset::Fig1.config().convert_units().unwrap();
        let beta_omega = spec.temperature.beta().unwrap() * spec.omega;
        assert!((beta_omega - 0.1528).abs() < 1e-3);
        let (spec, _) = Preset::Fig2.config().convert_units().unwrap();
        assert_eq!(spec.temperature, Temperature::Zero);
    }

    #[test]
    fn preset_toml_round_trip() {
        for p in [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4] {
            let c = p.config();
            let text = c.to_toml().unwrap();
            assert!(text.starts_with("schema = 1"));
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), c);
        }
    }

    #[test]
    fn rejects_negative_and_unknown() {
        let mut c = ScenarioConfig::default();
        c.gamma_ghz = -0.1;
        assert!(c.validate().is_err());
        let text = ScenarioConfig::default().to_toml().unwrap() + "bogus = 1\n";
        assert!(ScenarioConfig::from_toml(&text).is_err());
        let text = ScenarioConfig::default().to_toml().unwrap().replace("schema = 1", "schema = 2");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }
}
