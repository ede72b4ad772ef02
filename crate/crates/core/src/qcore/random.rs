//! Random states and unitaries, and the per-trial seed stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::layout::Layout;
use super::linalg::{c, CMatrix, CVector, C64};
use super::state::PureState;

pub type ProtocolRng = ChaCha20Rng;

/// Rng for a master seed.
pub fn seeded(seed: u64) -> ProtocolRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent stream for trial `index` under `seed`. Identical inputs
/// give identical streams regardless of scheduling order.
pub fn trial_rng(seed: u64, index: u64) -> ProtocolRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random isometry `C^{d_in} → C^{d_out}` (first columns of a Haar unitary).
pub fn haar_isometry<R: Rng + ?Sized>(d_out: usize, d_in: usize, rng: &mut R) -> CMatrix {
    assert!(d_out >= d_in, "isometry needs d_out ≥ d_in");
    haar_unitary(d_out, rng).columns(0, d_in).into_owned()
}

/// Haar-random pure state on a layout.
pub fn random_pure_state<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> PureState {
    let d = layout.dim();
    let v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
    PureState::from_unnormalized(layout, v).expect("Gaussian vector is nonzero")
}
