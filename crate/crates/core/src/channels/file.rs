//! JSON channel files:
//! `{"d_in":…,"d_out":…,"kraus":[[[[re,im],…],…],…]}`, each Kraus
//! operator given as `d_out` rows of `d_in` complex entries. Loading
//! rejects sets that are not trace preserving and reports the residual.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, CMatrix};

use super::QuantumChannel;

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    d_in: usize,
    d_out: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn write_channel(t: &QuantumChannel) -> String {
    let kraus = t
        .kraus()
        .iter()
        .map(|k| {
            (0..k.nrows())
                .map(|i| (0..k.ncols()).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    let file = ChannelFile {
        d_in: t.d_in(),
        d_out: t.d_out(),
        kraus,
    };
    serde_json::to_string(&file).expect("channel serializes")
}

pub fn read_channel(text: &str) -> Result<QuantumChannel> {
    let file: ChannelFile = serde_json::from_str(text)?;
    let mut kraus = Vec::with_capacity(file.kraus.len());
    for k in &file.kraus {
        if k.len() != file.d_out || k.iter().any(|row| row.len() != file.d_in) {
            return Err(Error::InvalidLayout(format!(
                "every Kraus operator must be {}×{}",
                file.d_out, file.d_in
            )));
        }
        kraus.push(CMatrix::from_fn(file.d_out, file.d_in, |i, j| c(k[i][j][0], k[i][j][1])));
    }
    QuantumChannel::new(kraus)
}

pub fn save_channel(t: &QuantumChannel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_channel(t))?;
    Ok(())
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<QuantumChannel> {
    read_channel(&std::fs::read_to_string(path)?)
}
