//! Dense complex linear algebra, labelled registers, and entropic
//! primitives. All entropies are in bits.
//!
//! Numerical negatives in spectra are clipped to zero before entropies are
//! taken; by the continuity of the von Neumann entropy in trace norm the
//! clipped value differs from the exact one by at most `η(ε) + ε log d`
//! for a perturbation of size `ε` (the universal Fannes constant is never
//! needed numerically).

mod layout;
pub mod linalg;
pub mod random;
mod state;

pub use layout::{Layout, Party};
pub use linalg::{
    binary_entropy, eig_hermitian, shannon_entropy, trace_norm, CMatrix, CVector, HermitianEigen,
    C64,
};
pub use state::{
    entanglement_entropy, fidelity, is_hermitian, partial_trace, schmidt, tensor, trace_distance,
    von_neumann_entropy, DensityOperator, PureState, Spectrum, Tensor, NORM_TOL,
};

pub(crate) use state::schmidt_at;
