//! Pretty-good measurement decoders and their isometric form.

use crate::error::{Error, Result};
use crate::qcore::linalg::{identity, psd_inv_sqrt, psd_sqrt, CMatrix};
use crate::qcore::DensityOperator;

/// Completeness tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-10;

/// Support cutoff for `S^{-1/2}`.
const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Pgm {
    /// `D_0, …, D_{N−1}` followed by the fail element `I − Π_supp S`.
    pub elements: Vec<CMatrix>,
    /// `(1/N) Σ_β tr(ρ_β D_β)`.
    pub success_probability: f64,
}

impl Pgm {
    /// Index of the fail element.
    pub fn fail_index(&self) -> usize {
        self.elements.len() - 1
    }
}

/// `D_β = S^{-1/2} ρ_β S^{-1/2}` with `S = Σ_γ ρ_γ`, inverse taken on the
/// support of `S`.
pub fn pgm(states: &[DensityOperator]) -> Result<Pgm> {
    let ops: Vec<CMatrix> = states.iter().map(|s| s.matrix().clone()).collect();
    pgm_operators(&ops)
}

pub(crate) fn pgm_operators(states: &[CMatrix]) -> Result<Pgm> {
    let d = states
        .first()
        .ok_or_else(|| Error::OutOfRange("PGM needs at least one state".into()))?
        .nrows();
    for s in states {
        if s.nrows() != d || s.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.nrows() });
        }
    }
    let mut sum = CMatrix::zeros(d, d);
    for s in states {
        sum += s;
    }
    let (inv, support) = psd_inv_sqrt(&sum, SUPPORT_TOL);
    let mut elements: Vec<CMatrix> = states.iter().map(|s| &inv * s * &inv).collect();
    let success = states
        .iter()
        .zip(&elements)
        .map(|(s, e)| (s * e).trace().re)
        .sum::<f64>()
        / states.len() as f64;
    elements.push(identity(d) - support);
    Ok(Pgm {
        elements,
        success_probability: success,
    })
}

/// `‖Σ E − I‖` (Frobenius).
pub fn povm_residual(elements: &[CMatrix]) -> f64 {
    let d = elements.first().map_or(0, |e| e.nrows());
    let mut sum = CMatrix::zeros(d, d);
    for e in elements {
        sum += e;
    }
    (sum - identity(d)).norm()
}

/// `V = Σ_β √D_β ⊗ |β⟩`, mapping `C^d` to `C^d ⊗ C^K` with the flag
/// register last. Outcome probabilities are the flag diagonal of `VρV†`.
pub fn decoder_isometry(povm: &[CMatrix]) -> Result<CMatrix> {
    let residual = povm_residual(povm);
    if residual > POVM_TOL || povm.is_empty() {
        return Err(Error::OutOfRange(format!(
            "elements do not sum to the identity (residual {residual:.3e})"
        )));
    }
    let d = povm[0].nrows();
    let k = povm.len();
    let mut v = CMatrix::zeros(d * k, d);
    for (beta, e) in povm.iter().enumerate() {
        let r = psd_sqrt(e);
        for i in 0..d {
            for j in 0..d {
                v[(i * k + beta, j)] = r[(i, j)];
            }
        }
    }
    Ok(v)
}
