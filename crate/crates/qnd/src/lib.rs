//! Simulation of tunable quantum-nondemolition (QND) measurements of an
//! optical field quadrature.
//!
//! A signal mode is mixed with a squeezed-vacuum probe on a beam splitter of
//! tunable transmittivity; the probe arm is read out by homodyne detection,
//! and the signal is restored by a feedback displacement plus a corrective
//! squeeze. Tuning the probe squeezing or the transmittivity sweeps the whole
//! family of measurements between a projective quadrature measurement and a
//! non-informative repeater that passes the state through untouched.
//!
//! The crate provides:
//!
//! - [`grid`]: single-mode states on a uniform quadrature grid, with
//!   band-limited displacement and squeezing;
//! - [`measurement`]: the measurement chain itself, both as the effective
//!   single-mode description (Gaussian measurement kernel, conditional and
//!   non-selective outputs, outcome sampling) and as the literal two-mode
//!   beam-splitter/homodyne/feedback chain used to cross-check it;
//! - [`fidelity`]: the two figures of merit, the information-gain fidelity
//!   between outcome distributions and the disturbance fidelity between
//!   input and output states, with closed forms for Gaussian signals;
//! - [`tradeoff`]: optimizers for the information/disturbance trade-off and
//!   the mapping from the abstract trade-off variable to apparatus settings.
//!
//! Quadrature convention: `x = (a' + a)/2`, vacuum variance 1/4.
//!
//! Data-parallel kernels run on rayon by default; disabling the `parallel`
//! feature switches every kernel to its sequential fallback.

pub mod error;
pub mod fidelity;
pub mod grid;
pub mod measurement;
mod par;
mod spectral;
pub mod tradeoff;

pub use num_complex::Complex64;

pub use error::{GridError, MeasurementError, OptimizeError};
pub use fidelity::TradeoffVariable;
pub use grid::{GridDensityMatrix, GridSpec, GridWavefunction};
pub use measurement::{
    Distribution, HomodyneOutcome, ProbeSpec, SetupParams, SqueezeDirection, TwoModeChain,
};
pub use tradeoff::{PhysicalOperatingPoint, RealizationConstraint, TradeoffPoint};
