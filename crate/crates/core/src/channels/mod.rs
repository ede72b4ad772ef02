//! Quantum channels in Kraus form, their Choi states and Stinespring
//! dilations, the environment-assisted capacity, unitary-mixture fitting
//! against a fixed source, and the environment-assisted coding
//! demonstration.

mod capacity;
mod coding;
mod file;
mod fit;

pub use capacity::{capacity_objective, env_assisted_capacity, CapacityOptions, CapacityReport};
pub use coding::{env_assisted_coding_demo, test_state, CodingOptions, CodingReport};
pub use file::{load_channel, read_channel, save_channel, write_channel};
pub use fit::{fit_unitary_mixture, FitOptions, FitReport, Mixture};

use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::linalg::{eig_hermitian_unchecked, identity, real, trace_norm, CMatrix, CVector, C64};
use crate::qcore::random::haar_isometry;
use crate::qcore::{DensityOperator, Layout, PureState};

/// Trace-preservation tolerance on `‖Σ K†K − I‖`.
pub const TP_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map `A → B` in Kraus form.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMatrix>,
}

/// `‖Σ K†K − I‖` (Frobenius).
pub fn tp_residual(kraus: &[CMatrix], d_in: usize) -> f64 {
    let mut sum = CMatrix::zeros(d_in, d_in);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - identity(d_in)).norm()
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::OutOfRange("a channel needs at least one Kraus operator".into()))?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::OutOfRange("Kraus operators must be nonempty".into()));
        }
        for k in &kraus {
            if k.shape() != (d_out, d_in) {
                return Err(Error::DimensionMismatch {
                    expected: d_out * d_in,
                    got: k.nrows() * k.ncols(),
                });
            }
        }
        let residual = tp_residual(&kraus, d_in);
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(QuantumChannel { d_in, d_out, kraus })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `Σ_k K ρ K†` on a bare matrix.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Adjoint map `Σ_k K† X K` (Heisenberg picture).
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    /// Output on a single register; a one-party input keeps its label.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: rho.dim(),
            });
        }
        let label = match rho.layout().parties() {
            [p] => p.label.clone(),
            _ => "B".to_string(),
        };
        let out = crate::qcore::linalg::hermitize(&self.apply_matrix(rho.matrix()));
        Ok(DensityOperator::from_parts(Layout::single(&label, self.d_out), out))
    }

    /// `T^{⊗n}` with Kraus operators `K_{k_1} ⊗ … ⊗ K_{k_n}`.
    pub fn tensor_power(&self, n: usize) -> Result<QuantumChannel> {
        if n == 0 {
            return Err(Error::OutOfRange("n must be at least 1".into()));
        }
        let mut kraus = self.kraus.clone();
        for _ in 1..n {
            kraus = kraus
                .iter()
                .flat_map(|a| self.kraus.iter().map(move |b| crate::qcore::linalg::kron(a, b)))
                .collect();
        }
        QuantumChannel::new(kraus)
    }

    /// Stinespring isometry `U: A → B ⊗ E` with the environment last:
    /// `U[(b·r + e), a] = K_e[b, a]`. The environment dimension is the
    /// number of stored Kraus operators.
    pub fn stinespring(&self) -> CMatrix {
        let r = self.kraus.len();
        let mut u = CMatrix::zeros(self.d_out * r, self.d_in);
        for (e, k) in self.kraus.iter().enumerate() {
            for b in 0..self.d_out {
                for a in 0..self.d_in {
                    u[(b * r + e, a)] = k[(b, a)];
                }
            }
        }
        u
    }

    /// Complementary channel `A → E`: `ρ ↦ [tr(K_e ρ K_f†)]_{ef}`.
    pub fn complementary(&self, rho: &CMatrix) -> CMatrix {
        let r = self.kraus.len();
        CMatrix::from_fn(r, r, |e, f| (&self.kraus[e] * rho * self.kraus[f].adjoint()).trace())
    }

    /// Whether `T(I/d) = I/d` within `1e-10` in trace norm.
    pub fn is_unital(&self) -> Result<bool> {
        if self.d_in != self.d_out {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: self.d_out,
            });
        }
        let d = self.d_in as f64;
        let mixed = identity(self.d_in) / real(d);
        Ok(trace_norm(&(self.apply_matrix(&mixed) - &mixed)) <= 1e-10)
    }

    /// Kraus operators from the eigendecomposition of the Choi matrix,
    /// dropping eigenvalues below `1e-12`: a minimal, linearly independent
    /// set.
    pub fn canonical(&self) -> Result<QuantumChannel> {
        channel_from_choi(&choi(self, &maximally_entangled(self.d_in))?)
    }

    /// Single Kraus operator that is an isometry, up to `1e-10`.
    pub fn is_isometry(&self) -> Result<bool> {
        let can = self.canonical()?;
        Ok(can.kraus.len() == 1 && (can.kraus[0].adjoint() * &can.kraus[0] - identity(self.d_in)).norm() <= 1e-10)
    }
}

/// `(1/√d) Σ_i |i⟩_R |i⟩_A`.
pub fn maximally_entangled(d: usize) -> PureState {
    let layout = Layout::from_pairs(&[("R", d), ("A", d)]).expect("valid layout");
    let s = 1.0 / (d as f64).sqrt();
    let v = CVector::from_fn(d * d, |i, _| if i / d == i % d { real(s) } else { real(0.0) });
    PureState::from_parts(layout, v)
}

/// Choi state `ρ_T = (id ⊗ T) φ` together with the reference state `φ`.
#[derive(Clone, Debug)]
pub struct ChoiState {
    /// Layout `R ⊗ B`.
    pub state: DensityOperator,
    /// Two-party reference `φ^{RA}`.
    pub reference: PureState,
}

impl ChoiState {
    pub fn is_pure(&self) -> bool {
        (self.state.purity() - 1.0).abs() <= 1e-10
    }
}

fn check_reference(phi: &PureState, d_in: usize) -> Result<(usize, CMatrix)> {
    let parties = phi.layout().parties();
    if parties.len() != 2 {
        return Err(Error::InvalidLayout("reference state needs exactly two parties".into()));
    }
    if parties[1].dim != d_in {
        return Err(Error::DimensionMismatch {
            expected: d_in,
            got: parties[1].dim,
        });
    }
    let dr = parties[0].dim;
    let m = CMatrix::from_fn(dr, d_in, |r, a| phi.amplitudes()[r * d_in + a]);
    Ok((dr, m))
}

/// `(id ⊗ T) φ` for a two-party `φ^{RA}` whose second party matches the
/// channel input.
pub fn choi(t: &QuantumChannel, phi: &PureState) -> Result<ChoiState> {
    let (dr, m) = check_reference(phi, t.d_in)?;
    let d = dr * t.d_out;
    let mut rho = CMatrix::zeros(d, d);
    for k in &t.kraus {
        // w[r, b] = Σ_a φ[r, a] K[b, a]
        let w = &m * k.transpose();
        let v = CVector::from_fn(d, |i, _| w[(i / t.d_out, i % t.d_out)]);
        rho += &v * v.adjoint();
    }
    let r_label = phi.layout().parties()[0].label.clone();
    let out_label = if r_label == "B" { "B'" } else { "B" };
    let layout = Layout::from_pairs(&[(r_label.as_str(), dr), (out_label, t.d_out)])?;
    Ok(ChoiState {
        state: DensityOperator::from_parts(layout, crate::qcore::linalg::hermitize(&rho)),
        reference: phi.clone(),
    })
}

/// Invert the Choi map. Needs `φ` of full Schmidt rank `d_A` with
/// `d_R = d_A`.
pub fn channel_from_choi(ch: &ChoiState) -> Result<QuantumChannel> {
    let d_in = ch.reference.layout().parties()[1].dim;
    let (dr, m) = check_reference(&ch.reference, d_in)?;
    if dr != d_in {
        return Err(Error::RankDeficient {
            rank: dr.min(d_in),
            dim: d_in,
        });
    }
    let svd = m.clone().svd(false, false);
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12).count();
    if rank < d_in {
        return Err(Error::RankDeficient { rank, dim: d_in });
    }
    let inv = m.try_inverse().ok_or(Error::RankDeficient { rank, dim: d_in })?;
    let d_out = ch.state.dim() / dr;
    let eig = eig_hermitian_unchecked(ch.state.matrix());
    let mut kraus = Vec::new();
    for (j, &mu) in eig.values.iter().enumerate() {
        if mu <= 1e-12 {
            continue;
        }
        let s = mu.sqrt();
        let w = CMatrix::from_fn(dr, d_out, |r, b| eig.vectors[(r * d_out + b, j)] * s);
        kraus.push((&inv * w).transpose());
    }
    QuantumChannel::new(kraus)
}

// ----- builtin channels -----

pub fn identity_channel(d: usize) -> Result<QuantumChannel> {
    QuantumChannel::new(vec![identity(d)])
}

/// Generalized Pauli `X^a Z^b` on `C^d`.
fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let w = std::f64::consts::TAU / d as f64;
    CMatrix::from_fn(d, d, |i, j| {
        if i == (j + a) % d {
            C64::from_polar(1.0, w * (b * j) as f64)
        } else {
            real(0.0)
        }
    })
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `ρ ↦ (1 − p) ρ + p·tr(ρ) I/d`, Kraus operators from the Weyl basis.
pub fn depolarizing(p: f64, d: usize) -> Result<QuantumChannel> {
    check_probability(p, "p")?;
    let dd = (d * d) as f64;
    let mut kraus = vec![identity(d) * real((1.0 - p + p / dd).sqrt())];
    if p > 0.0 {
        for a in 0..d {
            for b in 0..d {
                if a + b > 0 {
                    kraus.push(weyl(d, a, b) * real((p / dd).sqrt()));
                }
            }
        }
    }
    QuantumChannel::new(kraus)
}

/// `ρ ↦ (1 − p) ρ + p·diag(ρ)`, Kraus operators `Z^k`.
pub fn dephasing(p: f64, d: usize) -> Result<QuantumChannel> {
    check_probability(p, "p")?;
    let dd = d as f64;
    let mut kraus = vec![identity(d) * real((1.0 - p + p / dd).sqrt())];
    if p > 0.0 {
        for b in 1..d {
            kraus.push(weyl(d, 0, b) * real((p / dd).sqrt()));
        }
    }
    QuantumChannel::new(kraus)
}

/// Qubit amplitude damping with decay probability `γ`.
pub fn amplitude_damping(gamma: f64) -> Result<QuantumChannel> {
    check_probability(gamma, "gamma")?;
    let k0 = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real((1.0 - gamma).sqrt())]);
    let mut kraus = vec![k0];
    if gamma > 0.0 {
        kraus.push(CMatrix::from_row_slice(2, 2, &[real(0.0), real(gamma.sqrt()), real(0.0), real(0.0)]));
    }
    QuantumChannel::new(kraus)
}

/// Qutrit channel `ρ ↦ (tr ρ · I − ρᵀ)/2`, Kraus `(|i⟩⟨j| − |j⟩⟨i|)/√2`.
/// Its Choi state is the antisymmetric projector over 3.
pub fn aharonov_choi() -> QuantumChannel {
    let s = 0.5f64.sqrt();
    let mut kraus = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let mut k = CMatrix::zeros(3, 3);
            k[(i, j)] = real(s);
            k[(j, i)] = real(-s);
            kraus.push(k);
        }
    }
    QuantumChannel::new(kraus).expect("trace preserving")
}

/// `ρ ↦ Σ_i w_i U_i ρ U_i†`.
pub fn unitary_mixture(weights: &[f64], unitaries: &[CMatrix]) -> Result<QuantumChannel> {
    if weights.len() != unitaries.len() || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::OutOfRange("weights must be nonnegative, one per unitary".into()));
    }
    let kraus = weights
        .iter()
        .zip(unitaries)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, u)| u * real(w.sqrt()))
        .collect();
    QuantumChannel::new(kraus)
}

/// Channel with `k` Kraus operators cut from a Haar isometry.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, k: usize, rng: &mut R) -> QuantumChannel {
    let v = haar_isometry(d_out * k, d_in, rng);
    let kraus = (0..k).map(|e| v.rows(e * d_out, d_out).into_owned()).collect();
    QuantumChannel::new(kraus).expect("isometry blocks are trace preserving")
}
