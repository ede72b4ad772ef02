//! Entanglement of assistance and multipartite state distillation.
//!
//! The crate is organized bottom-up:
//!
//! - [`qcore`]: labelled registers, pure states, density operators,
//!   partial traces, spectra and entropies.
//! - [`states`]: the canonical states (EPR, GHZ, W, the qutrit determinant
//!   state, the Υ family), purification, helper-basis ensembles and the
//!   JSON state file format.
//! - [`measures`]: Holevo quantities, average ensemble entanglement,
//!   entanglement of assistance bounds and optimizer, Wootters concurrence,
//!   min-cut entanglement and one-way broadcast GHZ bounds.
//! - [`distill`]: finite-n execution of the type-class / Fourier-code
//!   helper measurement, the coherent GHZ extraction, and the four-party
//!   disengaging step.
//! - [`channels`]: Kraus channels, Choi states, Stinespring dilations,
//!   environment-assisted capacity, unitary-mixture fitting and the
//!   environment-assisted coding demonstration.

pub mod channels;
pub mod distill;
mod error;
pub mod measures;
pub mod qcore;
pub mod states;

pub use error::{Error, Result};
