use crate::error::{Error, Result};
use crate::qcore::linalg::{real, CMatrix, CVector};
use crate::qcore::{DensityOperator, Layout, PureState};

/// Branches with probability at or below this are dropped.
pub const DROP_TOL: f64 = 1e-14;

/// Probability-weighted pure states on a common layout.
#[derive(Clone, Debug)]
pub struct Ensemble {
    entries: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Checks positivity, Σq = 1 (1e-12) and identical layouts.
    pub fn new(entries: Vec<(f64, PureState)>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::InvalidLayout("empty ensemble".into()))?;
        let layout = first.1.layout().clone();
        let mut total = 0.0;
        for (q, s) in &entries {
            if !(*q > 0.0) {
                return Err(Error::OutOfRange(format!("ensemble weight {q} must be positive")));
            }
            if s.layout() != &layout {
                return Err(Error::InvalidLayout("ensemble members on different layouts".into()));
            }
            total += q;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTrace(total));
        }
        Ok(Ensemble { entries })
    }

    /// Uniform ensemble over the given states.
    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        let q = 1.0 / states.len().max(1) as f64;
        Ensemble::new(states.into_iter().map(|s| (q, s)).collect())
    }

    pub fn entries(&self) -> &[(f64, PureState)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn layout(&self) -> &Layout {
        self.entries[0].1.layout()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// `Σ_j q_j |ψ_j⟩⟨ψ_j|`.
    pub fn mixture(&self) -> DensityOperator {
        let d = self.layout().dim();
        let mut m = CMatrix::zeros(d, d);
        for (q, s) in &self.entries {
            let v = s.amplitudes();
            m += v * v.adjoint() * real(*q);
        }
        DensityOperator::from_parts(self.layout().clone(), m)
    }
}

/// Conditional states of the non-helper parties when the helper is measured
/// in the orthonormal basis given by the columns of `basis`:
/// `√q_j |ψ_j⟩ = (I ⊗ ⟨u_j|) |ψ⟩`. Zero-probability branches are dropped.
pub fn ensemble_from_helper_basis(
    psi: &PureState,
    helper_label: &str,
    basis: &CMatrix,
) -> Result<Ensemble> {
    let pos = psi.layout().position(helper_label)?;
    if psi.layout().len() < 2 {
        return Err(Error::InvalidPartition("helper is the only party".into()));
    }
    let dh = psi.layout().parties()[pos].dim;
    if basis.nrows() != dh || basis.ncols() != dh {
        return Err(Error::DimensionMismatch {
            expected: dh,
            got: basis.nrows(),
        });
    }
    let unit_err = (basis.adjoint() * basis - CMatrix::identity(dh, dh)).norm();
    if unit_err > 1e-10 {
        return Err(Error::OutOfRange(format!(
            "helper basis is not unitary (‖U†U − I‖ = {unit_err:.3e})"
        )));
    }
    let m = psi.coefficient_matrix_at(&[pos]);
    let cond = basis.adjoint() * m;
    let rest = psi.layout().complement(&[pos]);
    let layout = psi.layout().select(&rest);
    let mut entries = Vec::new();
    for j in 0..dh {
        let v: CVector = cond.row(j).transpose();
        let q = v.norm_squared();
        if q > DROP_TOL {
            entries.push((q, PureState::from_unnormalized(layout.clone(), v)?));
        }
    }
    let total: f64 = entries.iter().map(|e| e.0).sum();
    for e in entries.iter_mut() {
        e.0 /= total;
    }
    Ensemble::new(entries)
}

/// `{|+⟩, |−⟩}` for qubits; the discrete Fourier basis in general.
pub fn hadamard_basis(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |i, j| {
        let ang = 2.0 * std::f64::consts::PI * (i * j) as f64 / d as f64;
        num_complex::Complex64::from_polar(s, ang)
    })
}
