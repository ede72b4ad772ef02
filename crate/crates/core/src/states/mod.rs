//! Canonical states, purification and helper-basis ensembles.

mod ensemble;
mod file;

pub use ensemble::{ensemble_from_helper_basis, hadamard_basis, Ensemble, DROP_TOL};
pub use file::{load_state, read_state, save_state, write_state};

use crate::error::{Error, Result};
use crate::qcore::linalg::{real, CVector, ZERO};
use crate::qcore::{DensityOperator, Layout, Party, PureState};

/// Party labels `A, B, C, …` for the first `m` parties.
pub fn default_labels(m: usize) -> Vec<String> {
    (0..m)
        .map(|k| {
            if k < 26 {
                ((b'A' + k as u8) as char).to_string()
            } else {
                format!("P{k}")
            }
        })
        .collect()
}

fn uniform_layout(m: usize, d: usize) -> Layout {
    Layout::new(default_labels(m).into_iter().map(|l| Party::new(l, d)).collect())
        .expect("default labels are distinct")
}

/// `Σ_i |ii⟩ / √d` on parties A, B.
pub fn make_epr(d: usize) -> Result<PureState> {
    make_ghz(2, d)
}

/// `Σ_i |i…i⟩ / √d` on `m` parties.
pub fn make_ghz(m: usize, d: usize) -> Result<PureState> {
    if m < 2 || d < 2 {
        return Err(Error::OutOfRange(format!("GHZ needs m ≥ 2 and d ≥ 2 (got m={m}, d={d})")));
    }
    let layout = uniform_layout(m, d);
    let mut v = CVector::zeros(layout.dim());
    let a = real(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[layout.index(&vec![i; m])] = a;
    }
    Ok(PureState::from_parts(layout, v))
}

/// `(|001⟩ + |010⟩ + |100⟩)/√3`.
pub fn make_w() -> PureState {
    let layout = uniform_layout(3, 2);
    let mut v = CVector::zeros(8);
    let a = real(1.0 / 3f64.sqrt());
    for i in [1, 2, 4] {
        v[i] = a;
    }
    PureState::from_parts(layout, v)
}

/// Three-qutrit determinant state: `±1/√6` on `|σ(0)σ(1)σ(2)⟩` with the
/// sign of the permutation σ.
pub fn make_aharonov() -> PureState {
    let layout = uniform_layout(3, 3);
    let mut v = CVector::zeros(27);
    let a = 1.0 / 6f64.sqrt();
    let perms: [([usize; 3], f64); 6] = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([2, 1, 0], -1.0),
        ([1, 0, 2], -1.0),
        ([0, 2, 1], -1.0),
    ];
    for (p, s) in perms {
        v[layout.index(&p)] = real(s * a);
    }
    PureState::from_parts(layout, v)
}

/// `α|0⟩^A|Φ⁺⟩^{BC} + β|1⟩^A|Φ⁻⟩^{BC}` with `α² = alpha2 ∈ [0, 1/2]`.
pub fn make_upsilon(alpha2: f64) -> Result<PureState> {
    if !(0.0..=0.5).contains(&alpha2) {
        return Err(Error::OutOfRange(format!("α² = {alpha2} not in [0, 1/2]")));
    }
    let a = alpha2.sqrt();
    let b = (1.0 - alpha2).sqrt();
    let h = 1.0 / 2f64.sqrt();
    let layout = uniform_layout(3, 2);
    let mut v = CVector::zeros(8);
    // |0⟩|00⟩, |0⟩|11⟩, |1⟩|00⟩, |1⟩|11⟩
    v[0] = real(a * h);
    v[3] = real(a * h);
    v[4] = real(b * h);
    v[7] = real(-b * h);
    Ok(PureState::from_parts(layout, v))
}

/// Four-qutrit state on `A1, A2, B1, B2`:
/// `[(|01⟩−|10⟩)^{A1B1}(|01⟩−|10⟩)^{A2B2} + (|12⟩−|21⟩)^{A1B1}(|12⟩−|21⟩)^{A2B2}] / √8`.
pub fn make_example1_phi() -> PureState {
    let layout = Layout::from_pairs(&[("A1", 3), ("A2", 3), ("B1", 3), ("B2", 3)])
        .expect("distinct labels");
    let mut v = CVector::zeros(81);
    let singlet = |x: usize, y: usize| [((x, y), 1.0), ((y, x), -1.0)];
    let amp = 1.0 / 8f64.sqrt();
    for (x, y) in [(0, 1), (1, 2)] {
        for ((a1, b1), s1) in singlet(x, y) {
            for ((a2, b2), s2) in singlet(x, y) {
                v[layout.index(&[a1, a2, b1, b2])] += real(s1 * s2 * amp);
            }
        }
    }
    PureState::from_parts(layout, v)
}

/// Eigenvalue cutoff deciding the purification rank.
pub const RANK_TOL: f64 = 1e-12;

/// Eigenbasis purification `Σ_k √λ_k |v_k⟩|k⟩` with eigenvalues descending;
/// the appended helper has dimension `rank(ρ)`. Each eigenvector's phase is
/// fixed so its largest-magnitude entry is real positive.
pub fn purify(rho: &DensityOperator, helper_label: &str) -> Result<PureState> {
    if rho.layout().contains(helper_label) {
        return Err(Error::DuplicateParty(helper_label.to_string()));
    }
    let eig = rho.eigen();
    let rank = eig.values.iter().filter(|&&v| v > RANK_TOL).count().max(1);
    let d = rho.dim();
    let mut v = CVector::zeros(d * rank);
    for k in 0..rank {
        let lam = eig.values[k].max(0.0);
        let col = eig.vectors.column(k);
        let (imax, _) = col
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 + 1e-12 { (i, z.norm()) } else { best });
        let phase = if col[imax].norm() > 0.0 {
            col[imax].conj() / col[imax].norm()
        } else {
            real(1.0)
        };
        for i in 0..d {
            v[i * rank + k] = col[i] * phase * real(lam.sqrt());
        }
    }
    let layout = rho.layout().concat(&Layout::single(helper_label, rank))?;
    PureState::from_unnormalized(layout, v)
}

/// `|0…0⟩` with the given layout.
pub fn zero_state(layout: Layout) -> PureState {
    let mut v = CVector::from_element(layout.dim(), ZERO);
    v[0] = real(1.0);
    PureState::from_parts(layout, v)
}
