//! Exact non-Markovian dynamics of a damped, optionally driven harmonic
//! oscillator coupled to an Ohmic or supra-Ohmic bosonic bath, read out as
//! an effective qubit on its two lowest Fock levels.
//!
//! Pipeline: [`bath`] kernels → [`greens`] fundamental solutions →
//! [`channel`] Gaussian propagator → [`fock`] projection, compared with the
//! [`markov`] baselines. [`scenario`] wires it together and writes CSV/SVG.

pub mod bath;
pub mod channel;
pub mod error;
pub mod fock;
pub mod greens;
pub mod markov;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};
