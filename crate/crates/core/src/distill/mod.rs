//! Finite-n execution of the distillation protocols: the helper's
//! type-class and Fourier-code measurement for EPR distillation, the
//! coherent GHZ extraction with PGM decoders, and the four-party step that
//! disengages one helper.

mod four;
mod ghz;
mod pgm;
mod protocol;
mod source;
mod types;

pub use four::{disengage_fourth, four_party_code_size, FourOptions, FourRecord, FourReport};
pub use ghz::{run_ghz_protocol, GhzRecord, GhzReport};
pub use pgm::{decoder_isometry, pgm, povm_residual, Pgm, POVM_TOL};
pub use protocol::{
    code_size, helper_measure, run_eoa_protocol, Completion, CutEntropy, DistillReport, Outcome,
    OutcomeRecord, ProtocolOptions,
};
pub(crate) use protocol::mean_std;
pub use source::{copy_permutation, sorting_permutation, Copies, Source};
pub use types::{
    binomial, copies_layout, copy_labels, enumerate_types, fourier_phase, fourier_state,
    fourier_vector, povm_constant, sequence_index, type_projector, Code, TypeClass,
    DEFAULT_SEQUENCE_CAP,
};
