//! JSON state files:
//! `{"parties":[{"label":"A","dim":2},…],"amplitudes":[[re,im],…]}` with
//! amplitudes in the global index order (first party most significant).
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! write/read cycle is bit-faithful.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qcore::linalg::c;
use crate::qcore::{CVector, Layout, Party, PureState};

#[derive(Serialize, Deserialize)]
struct StateFile {
    parties: Vec<Party>,
    amplitudes: Vec<[f64; 2]>,
}

pub fn write_state(psi: &PureState) -> String {
    let file = StateFile {
        parties: psi.layout().parties().to_vec(),
        amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&file).expect("state serializes")
}

/// Parse and validate (dimensions, unit norm within 1e-12).
pub fn read_state(text: &str) -> Result<PureState> {
    let file: StateFile = serde_json::from_str(text)?;
    let layout = Layout::new(file.parties)?;
    let v = CVector::from_iterator(
        file.amplitudes.len(),
        file.amplitudes.iter().map(|a| c(a[0], a[1])),
    );
    PureState::new(layout, v)
}

pub fn save_state(psi: &PureState, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_state(psi))?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<PureState> {
    read_state(&std::fs::read_to_string(path)?)
}
