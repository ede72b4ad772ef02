//! Ensemble optimizer over helper measurements.
//!
//! The helper register (dimension `d_C`) is mapped by an isometry into a
//! `k·d_C` dimensional space which is then measured in the computational
//! basis. Outcome `i` leaves `w_i = Σ_c V[i,c] v_c` on the remaining parties,
//! where `v_c = ⟨c|_C ψ`. Every pure-state decomposition of `ρ^{ab}` with at
//! most `k·d_C` members arises this way. A Givens rotation acting on rows
//! `p, q` of the isometry only mixes `w_p` and `w_q`, so the objective
//! `Σ_i ‖w_i‖² E(w_i/‖w_i‖)` can be optimized pairwise without tracking the
//! isometry itself.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, hermitian_eigenvalues, CMatrix, CVector, C64};
use crate::qcore::random::{haar_isometry, trial_rng};
use crate::qcore::PureState;
use crate::states::{Ensemble, DROP_TOL};

use super::eoa_upper_bound;

#[derive(Clone, Debug, Serialize)]
pub struct EoaOptions {
    pub restarts: usize,
    /// Maximum number of full Givens sweeps per restart.
    pub max_iter: usize,
    /// Stop once a sweep improves the objective by less than this.
    pub tol: f64,
    /// Outcome count is `ancilla_factor · d_C`.
    pub ancilla_factor: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for EoaOptions {
    fn default() -> Self {
        EoaOptions {
            restarts: 20,
            max_iter: 200,
            tol: 1e-7,
            ancilla_factor: 2,
            seed: 0,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerTrace {
    pub restarts: usize,
    pub best_restart: usize,
    /// Sweeps used by the winning restart.
    pub iterations: usize,
    pub total_iterations: usize,
    /// Norm of the finite-difference gradient over all pair rotations at
    /// the returned point.
    pub final_gradient_norm: f64,
    /// Whether the winning restart stopped on `tol` rather than `max_iter`.
    pub converged: bool,
    pub restart_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EoaReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Ensemble on the `a` parties followed by the `b` parties.
    pub witness: Ensemble,
    pub trace: OptimizerTrace,
}

/// Smallest average entanglement found; an upper value for `E_F`.
#[derive(Clone, Debug)]
pub struct FormationReport {
    pub value: f64,
    pub witness: Ensemble,
    pub trace: OptimizerTrace,
}

/// Maximize the average `a | b` entanglement over helper measurements.
pub fn eoa_optimize<S: AsRef<str>>(
    psi: &PureState,
    a: &[S],
    b: &[S],
    helper: &[S],
    opts: &EoaOptions,
) -> Result<EoaReport> {
    let upper = eoa_upper_bound(psi, a, b)?;
    let (value, witness, trace) = optimize(psi, a, b, helper, opts, 1.0)?;
    Ok(EoaReport {
        lower_bound: value,
        upper_bound: upper,
        witness,
        trace,
    })
}

/// Minimize the average `a | b` entanglement over helper measurements.
pub fn eof_optimize<S: AsRef<str>>(
    psi: &PureState,
    a: &[S],
    b: &[S],
    helper: &[S],
    opts: &EoaOptions,
) -> Result<FormationReport> {
    let (value, witness, trace) = optimize(psi, a, b, helper, opts, -1.0)?;
    Ok(FormationReport {
        value,
        witness,
        trace,
    })
}

/// Weighted entanglement `‖w‖² E(w/‖w‖)` of an unnormalized vector on
/// `d_a × d_b`, in bits.
fn weighted_entropy(w: &CVector, da: usize, db: usize) -> f64 {
    let s = w.norm_squared();
    if s <= 1e-300 {
        return 0.0;
    }
    // row-major reshape: w[i*db + j] = X[i, j]
    let x = CMatrix::from_fn(da, db, |i, j| w[i * db + j]);
    let g = if da <= db { &x * x.adjoint() } else { x.adjoint() * &x };
    let mut acc = 0.0;
    for l in hermitian_eigenvalues(&g) {
        if l > 0.0 {
            acc -= l * l.log2();
        }
    }
    (acc + s * s.log2()).max(0.0)
}

const COMPASS_EVALS: usize = 400;

struct Problem {
    da: usize,
    db: usize,
    sign: f64,
}

impl Problem {
    fn g(&self, w: &CVector) -> f64 {
        self.sign * weighted_entropy(w, self.da, self.db)
    }

    fn rotate(&self, wp: &CVector, wq: &CVector, theta: f64, phi: f64) -> (CVector, CVector) {
        let (s, co) = theta.sin_cos();
        let e = C64::from_polar(1.0, phi);
        let np = wp * c(co, 0.0) - wq * (e * s);
        let nq = wp * (e.conj() * s) + wq * c(co, 0.0);
        (np, nq)
    }

    fn pair_value(&self, wp: &CVector, wq: &CVector, theta: f64, phi: f64) -> f64 {
        let (np, nq) = self.rotate(wp, wq, theta, phi);
        self.g(&np) + self.g(&nq)
    }

    /// Best rotation of the pair: coarse grid, then compass search.
    fn best_rotation(&self, wp: &CVector, wq: &CVector) -> (f64, f64, f64) {
        use std::f64::consts::PI;
        let base = self.g(wp) + self.g(wq);
        let (mut bt, mut bp, mut bv) = (0.0, 0.0, base);
        const GT: usize = 6;
        const GP: usize = 6;
        for it in 1..GT {
            let theta = it as f64 * PI / (2.0 * GT as f64);
            for ip in 0..GP {
                let phi = ip as f64 * 2.0 * PI / GP as f64;
                let v = self.pair_value(wp, wq, theta, phi);
                if v > bv {
                    (bt, bp, bv) = (theta, phi, v);
                }
            }
        }
        let (mut st, mut sp) = (PI / (4.0 * GT as f64), PI / GP as f64);
        let mut evals = 0;
        // flat directions would otherwise let rounding noise drive long walks
        while st > 1e-6 && evals < COMPASS_EVALS {
            let mut moved = false;
            for (dt, dp) in [(st, 0.0), (-st, 0.0), (0.0, sp), (0.0, -sp)] {
                let v = self.pair_value(wp, wq, bt + dt, bp + dp);
                evals += 1;
                if v > bv + 1e-14 * bv.abs().max(1.0) {
                    (bt, bp, bv) = (bt + dt, bp + dp, v);
                    moved = true;
                    break;
                }
            }
            if !moved {
                st /= 2.0;
                sp /= 2.0;
            }
        }
        (bt, bp, bv - base)
    }

    fn objective(&self, w: &[CVector]) -> f64 {
        w.iter().map(|x| self.g(x)).sum()
    }

    fn gradient_norm(&self, w: &[CVector]) -> f64 {
        let h = 1e-6;
        let mut acc = 0.0;
        for p in 0..w.len() {
            for q in (p + 1)..w.len() {
                for phi in [0.0, std::f64::consts::FRAC_PI_2] {
                    let d = (self.pair_value(&w[p], &w[q], h, phi)
                        - self.pair_value(&w[p], &w[q], -h, phi))
                        / (2.0 * h);
                    acc += d * d;
                }
            }
        }
        acc.sqrt()
    }

    fn run(&self, mut w: Vec<CVector>, opts: &EoaOptions) -> (Vec<CVector>, f64, usize, bool) {
        let mut value = self.objective(&w);
        let n = w.len();
        for sweep in 1..=opts.max_iter {
            let start = value;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (t, ph, gain) = self.best_rotation(&w[p], &w[q]);
                    if gain > 0.0 {
                        let (np, nq) = self.rotate(&w[p], &w[q], t, ph);
                        w[p] = np;
                        w[q] = nq;
                    }
                }
            }
            value = self.objective(&w);
            if value - start < opts.tol {
                return (w, value, sweep, true);
            }
        }
        (w, value, opts.max_iter, false)
    }
}

fn optimize<S: AsRef<str>>(
    psi: &PureState,
    a: &[S],
    b: &[S],
    helper: &[S],
    opts: &EoaOptions,
    sign: f64,
) -> Result<(f64, Ensemble, OptimizerTrace)> {
    let layout = psi.layout();
    let pa = layout.positions_of(a)?;
    let pb = layout.positions_of(b)?;
    let pc = layout.positions_of(helper)?;
    let mut all: Vec<usize> = pa.iter().chain(&pb).chain(&pc).copied().collect();
    all.sort_unstable();
    all.dedup();
    if pa.is_empty() || pb.is_empty() || all.len() != pa.len() + pb.len() + pc.len() || all.len() != layout.len() {
        return Err(Error::InvalidPartition(
            "a and b must be nonempty; a, b and helper must be disjoint and cover every party".into(),
        ));
    }
    if opts.restarts == 0 || opts.ancilla_factor == 0 {
        return Err(Error::OutOfRange("restarts and ancilla_factor must be at least 1".into()));
    }
    let order: Vec<&str> = pa
        .iter()
        .chain(&pb)
        .chain(&pc)
        .map(|&p| layout.parties()[p].label.as_str())
        .collect();
    let psi = psi.permuted(&order)?;
    let ab_pos: Vec<usize> = (0..pa.len() + pb.len()).collect();
    let ab_layout = psi.layout().select(&ab_pos);
    let da: usize = pa.iter().map(|&p| layout.parties()[p].dim).product();
    let db: usize = pb.iter().map(|&p| layout.parties()[p].dim).product();
    let dc: usize = pc.iter().map(|&p| layout.parties()[p].dim).product();
    // columns v_c of the (d_a d_b) × d_c amplitude matrix
    let m = CMatrix::from_fn(da * db, dc, |i, j| psi.amplitudes()[i * dc + j]);
    let outcomes = opts.ancilla_factor * dc;
    let problem = Problem { da, db, sign };

    let one = |r: usize| {
        let mut rng = trial_rng(opts.seed, r as u64);
        let v = haar_isometry(outcomes, dc, &mut rng);
        let wm = &m * v.transpose();
        let w: Vec<CVector> = (0..outcomes).map(|i| wm.column(i).into_owned()).collect();
        problem.run(w, opts)
    };
    let results: Vec<_> = if opts.parallel {
        (0..opts.restarts).into_par_iter().map(one).collect()
    } else {
        (0..opts.restarts).map(one).collect()
    };
    let mut best = 0;
    for (r, res) in results.iter().enumerate() {
        if res.1 > results[best].1 {
            best = r;
        }
    }
    let (w, _, iters, converged) = &results[best];
    let grad = problem.gradient_norm(w);
    let mut entries = Vec::new();
    for x in w {
        let q = x.norm_squared();
        if q > DROP_TOL {
            entries.push((q, PureState::from_unnormalized(ab_layout.clone(), x.clone())?));
        }
    }
    let total: f64 = entries.iter().map(|e| e.0).sum();
    for e in entries.iter_mut() {
        e.0 /= total;
    }
    let witness = Ensemble::new(entries)?;
    let value: f64 = witness
        .entries()
        .iter()
        .map(|(q, s)| q * weighted_entropy(s.amplitudes(), da, db))
        .sum();
    let trace = OptimizerTrace {
        restarts: opts.restarts,
        best_restart: best,
        iterations: *iters,
        total_iterations: results.iter().map(|r| r.2).sum(),
        final_gradient_norm: grad,
        converged: *converged,
        restart_values: results.iter().map(|r| sign * r.1).collect(),
    };
    Ok((value, witness, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::avg_entanglement;
    use crate::qcore::random::{random_pure_state, seeded};
    use crate::qcore::{trace_distance, Layout, Tensor};
    use crate::states::{make_aharonov, make_epr, make_w, zero_state};

    fn quick() -> EoaOptions {
        EoaOptions {
            restarts: 4,
            seed: 3,
            ..EoaOptions::default()
        }
    }

    #[test]
    fn weighted_entropy_matches_schmidt() {
        let psi = random_pure_state(Layout::from_pairs(&[("A", 2), ("B", 3)]).unwrap(), &mut seeded(1));
        let direct = crate::qcore::entanglement_entropy(&psi, &["A"]).unwrap();
        let scaled = psi.amplitudes() * c(0.5, 0.0);
        assert!((weighted_entropy(psi.amplitudes(), 2, 3) - direct).abs() < 1e-12);
        assert!((weighted_entropy(&scaled, 2, 3) - 0.25 * direct).abs() < 1e-12);
    }

    #[test]
    fn pure_marginal_ignores_helper() {
        let p = make_epr(2).unwrap().tensor(&zero_state(Layout::single("C", 2))).unwrap();
        let r = eoa_optimize(&p, &["A"], &["B"], &["C"], &quick()).unwrap();
        assert!((r.lower_bound - 1.0).abs() < 1e-9);
        assert!((r.upper_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aharonov_single_copy() {
        let r = eoa_optimize(&make_aharonov(), &["A"], &["B"], &["C"], &quick()).unwrap();
        assert!((r.lower_bound - 1.0).abs() < 1e-9);
        assert!((r.upper_bound - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn w_state_bounds_and_witness() {
        let w = make_w();
        let r = eoa_optimize(&w, &["A"], &["B"], &["C"], &quick()).unwrap();
        assert!(r.lower_bound <= r.upper_bound + 1e-9);
        // E_A(W^{AB}) ≥ the Fourier-basis ensemble's value
        assert!(r.lower_bound > 0.55);
        let rho = w.reduced(&["A", "B"]).unwrap();
        assert!(trace_distance(&rho, &r.witness.mixture()).unwrap() < 1e-8);
        assert!((avg_entanglement(&r.witness, &["A"]).unwrap() - r.lower_bound).abs() < 1e-12);
        let f = eof_optimize(&w, &["A"], &["B"], &["C"], &quick()).unwrap();
        let exact = crate::measures::eof_2qubit(&rho).unwrap();
        assert!(f.value >= exact - 1e-9);
        assert!(f.value < exact + 1e-4, "{} vs {exact}", f.value);
    }

    #[test]
    fn deterministic_given_seed() {
        let w = make_w();
        let mut o = quick();
        let a = eoa_optimize(&w, &["A"], &["B"], &["C"], &o).unwrap();
        o.parallel = false;
        let b = eoa_optimize(&w, &["A"], &["B"], &["C"], &o).unwrap();
        assert_eq!(a.lower_bound.to_bits(), b.lower_bound.to_bits());
        assert_eq!(a.trace.best_restart, b.trace.best_restart);
    }

    #[test]
    fn bad_groups() {
        let w = make_w();
        assert!(eoa_optimize(&w, &["A"], &["A"], &["C"], &quick()).is_err());
        assert!(eoa_optimize(&w, &["A"], &["B"], &[] as &[&str], &quick()).is_err());
    }
}
