//! `C_A(T) = max_ρ min{S(ρ), S(T(ρ))}` by Frank–Wolfe ascent.
//!
//! Both branches are concave, so any convex combination
//! `G_λ = λ∇S(ρ) + (1−λ)∇S(T(ρ))` of the active gradients is a
//! supergradient of the minimum, and the Frank–Wolfe gap
//! `λ_max(G_λ) − tr(G_λ ρ)` bounds the distance to the optimum. Away from
//! the kink the active branch is used; at the kink `λ` is chosen to make
//! that certificate as small as possible.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{eig_hermitian_unchecked, hermitian_eigenvalues, hermitize, identity, real, CMatrix};

use super::QuantumChannel;

/// Branches closer than this are treated as a kink.
const KINK_TOL: f64 = 1e-9;
/// Eigenvalue floor inside `log ρ`.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug)]
pub struct CapacityOptions {
    /// Stop once the certified gap is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub capacity: f64,
    /// Maximizer as rows of `[re, im]` pairs.
    #[serde(serialize_with = "serialize_matrix")]
    pub rho: CMatrix,
    pub input_entropy: f64,
    pub output_entropy: f64,
    /// Frank–Wolfe certificate: the optimum is at most `capacity + gap`.
    pub gap: f64,
    pub iterations: usize,
    /// Whether the gap fell below `tol` within `max_iter`.
    pub converged: bool,
}

pub(crate) fn serialize_matrix<S: serde::Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

fn entropy_bits(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

/// `−log₂ m` (the entropy gradient up to a multiple of the identity).
fn neg_log(m: &CMatrix) -> CMatrix {
    eig_hermitian_unchecked(m).map(|l| -l.max(LOG_FLOOR).log2())
}

/// `min{S(ρ), S(T(ρ))}` in bits.
pub fn capacity_objective(t: &QuantumChannel, rho: &CMatrix) -> f64 {
    entropy_bits(rho).min(entropy_bits(&t.apply_matrix(rho)))
}

struct Ascent<'a> {
    t: &'a QuantumChannel,
}

impl Ascent<'_> {
    fn branches(&self, rho: &CMatrix) -> (f64, f64) {
        (entropy_bits(rho), entropy_bits(&self.t.apply_matrix(rho)))
    }

    fn gradients(&self, rho: &CMatrix) -> (CMatrix, CMatrix) {
        let g1 = neg_log(rho);
        let g2 = self.t.apply_adjoint(&neg_log(&hermitize(&self.t.apply_matrix(rho))));
        (g1, g2)
    }

    /// Gap and top eigenvector of `G_λ`.
    fn gap(&self, g1: &CMatrix, g2: &CMatrix, lambda: f64, rho: &CMatrix) -> (f64, CMatrix) {
        let g = hermitize(&(g1 * real(lambda) + g2 * real(1.0 - lambda)));
        let e = eig_hermitian_unchecked(&g);
        let top = e.vectors.column(0).into_owned();
        let lin = (&g * rho).trace().re;
        (e.values[0] - lin, &top * top.adjoint())
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximize `min{S(ρ), S(T(ρ))}` starting from `I/d`. The result carries
/// the certified gap; `converged` is false when `max_iter` ran out first.
pub fn env_assisted_capacity(t: &QuantumChannel, opts: &CapacityOptions) -> Result<CapacityReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::OutOfRange("tol must be positive".into()));
    }
    let d = t.d_in();
    let asc = Ascent { t };
    let mut rho = identity(d) / real(d as f64);
    let mut force_kink = false;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        iterations = it;
        let (s1, s2) = asc.branches(&rho);
        let f0 = s1.min(s2);
        let (g1, g2) = asc.gradients(&rho);
        let kink = force_kink || (s1 - s2).abs() < KINK_TOL;
        let (_, (g, sigma)) = if kink {
            // the gap is convex in λ
            let (l, _) = golden_max(|l| -asc.gap(&g1, &g2, l, &rho).0, 0.0, 1.0, 60);
            let mut best = (l, asc.gap(&g1, &g2, l, &rho));
            for end in [0.0, 1.0] {
                let cand = asc.gap(&g1, &g2, end, &rho);
                if cand.0 < best.1 .0 {
                    best = (end, cand);
                }
            }
            best
        } else if s1 < s2 {
            (1.0, asc.gap(&g1, &g2, 1.0, &rho))
        } else {
            (0.0, asc.gap(&g1, &g2, 0.0, &rho))
        };
        gap = g.max(0.0);
        if gap < opts.tol {
            converged = true;
            break;
        }
        let dir = &sigma - &rho;
        let eval = |s: f64| capacity_objective(t, &(&rho + &dir * real(s)));
        let (step, f1) = golden_max(eval, 0.0, 1.0, 80);
        if f1 > f0 + 1e-15 {
            rho = hermitize(&(&rho + &dir * real(step)));
            force_kink = false;
        } else if !force_kink {
            force_kink = true;
        } else {
            break;
        }
        iterations = it + 1;
    }
    let (s1, s2) = asc.branches(&rho);
    Ok(CapacityReport {
        capacity: s1.min(s2),
        rho,
        input_entropy: s1,
        output_entropy: s2,
        gap,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, dephasing, depolarizing, identity_channel, random_channel};
    use crate::qcore::linalg::binary_entropy;
    use crate::qcore::random::seeded;

    #[test]
    fn closed_forms() {
        let o = CapacityOptions::default();
        let r = env_assisted_capacity(&identity_channel(2).unwrap(), &o).unwrap();
        assert!((r.capacity - 1.0).abs() < 1e-12 && r.converged);
        let r = env_assisted_capacity(&identity_channel(3).unwrap(), &o).unwrap();
        assert!((r.capacity - 3f64.log2()).abs() < 1e-12);
        let r = env_assisted_capacity(&depolarizing(1.0, 2).unwrap(), &o).unwrap();
        assert!((r.capacity - 1.0).abs() < 1e-12);
        let r = env_assisted_capacity(&dephasing(0.7, 2).unwrap(), &o).unwrap();
        assert!((r.capacity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping_matches_diagonal_scan() {
        let g = 0.5;
        let r = env_assisted_capacity(&amplitude_damping(g).unwrap(), &CapacityOptions::default()).unwrap();
        // the optimum is diagonal: min{H(p), H((1−γ)p)} on a fine grid
        let oracle = (0..=200_000)
            .map(|i| {
                let p = i as f64 / 200_000.0;
                binary_entropy(p).unwrap().min(binary_entropy((1.0 - g) * p).unwrap())
            })
            .fold(0.0, f64::max);
        assert!((r.capacity - oracle).abs() < 1e-6, "{} vs {oracle}", r.capacity);
        assert!(r.capacity + r.gap >= oracle - 1e-9);
    }

    #[test]
    fn bounded_by_dimensions() {
        let mut rng = seeded(3);
        for _ in 0..10 {
            let t = random_channel(3, 2, 2, &mut rng);
            let r = env_assisted_capacity(&t, &CapacityOptions::default()).unwrap();
            assert!(r.capacity <= 1.0 + 1e-9);
            assert!(r.gap < 1e-6, "gap {}", r.gap);
        }
    }
}
