//! Fit `T^{⊗n}` by a mixture of unitaries (or isometries / co-isometries
//! when the dimensions differ) against the fixed source `φ^{⊗n}`:
//! minimize `‖ρ_T^{⊗n} − Σ_i w_i |v_i⟩⟨v_i|‖₁` with
//! `|v_i⟩ = (1 ⊗ V_i)|φ^{⊗n}⟩`. This is not the cb-norm distance.
//!
//! Each term moves along one-parameter subgroups `exp(itG)` for elementary
//! generators `G` (a phase on one level, or a real or imaginary rotation of
//! two levels) applied on the larger side of `V_i`; weights move mass
//! between pairs. A Hilbert–Schmidt stage is followed by a trace-norm
//! polish. Terms are added one at a time, each seeded from the top
//! eigenvector of the residual, and a stage never ends worse than the one
//! before it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{eig_hermitian_unchecked, hermitize, real, trace_norm, CMatrix, CVector, C64};
use crate::qcore::random::{haar_unitary, trial_rng, ProtocolRng};

use super::capacity::serialize_matrix;
use super::{choi, maximally_entangled, QuantumChannel};

/// Largest `d_in^n · d_out^n` the fitter accepts.
const MAX_CHOI_DIM: u128 = 256;

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub n_copies: usize,
    pub k_terms: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Hilbert–Schmidt sweeps per stage.
    pub hs_sweeps: usize,
    /// Trace-norm sweeps per stage.
    pub polish_sweeps: usize,
    pub parallel: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_copies: 1,
            k_terms: 2,
            restarts: 10,
            seed: 0,
            hs_sweeps: 100,
            polish_sweeps: 20,
            parallel: true,
        }
    }
}

fn serialize_matrices<S: serde::Serializer>(ms: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct M<'a>(#[serde(serialize_with = "serialize_matrix")] &'a CMatrix);
    let mut seq = s.serialize_seq(Some(ms.len()))?;
    for m in ms {
        seq.serialize_element(&M(m))?;
    }
    seq.end()
}

#[derive(Clone, Debug, Serialize)]
pub struct Mixture {
    pub weights: Vec<f64>,
    #[serde(serialize_with = "serialize_matrices")]
    pub operators: Vec<CMatrix>,
}

impl Mixture {
    pub fn channel(&self) -> Result<QuantumChannel> {
        let kraus = self
            .weights
            .iter()
            .zip(&self.operators)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, v)| v * real(w.sqrt()))
            .collect();
        QuantumChannel::new(kraus)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub metric: String,
    /// `‖ρ_T^{⊗n} − (id ⊗ T')φ^{⊗n}‖₁` of the best restart.
    pub distance: f64,
    pub n_copies: usize,
    pub k_terms: usize,
    /// Whether the operators are unitaries (equal dimensions).
    pub unitary: bool,
    pub mixture: Mixture,
    pub best_restart: usize,
    pub restart_distances: Vec<f64>,
    /// Best restart's distance after each stage `k = 1, …, k_terms`.
    pub ladder: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Gen {
    Phase(usize),
    Real(usize, usize),
    Imag(usize, usize),
}

#[derive(Clone, Copy, PartialEq)]
enum Obj {
    Hs,
    Trace,
}

struct Fitter {
    target: CMatrix,
    d_ref: usize,
    d_out: usize,
    /// Generators act on rows when true, columns otherwise.
    left: bool,
    gens: Vec<Gen>,
}

#[derive(Clone)]
struct Terms {
    ops: Vec<CMatrix>,
    vecs: Vec<CVector>,
    w: Vec<f64>,
}

impl Fitter {
    fn vec_of(&self, v: &CMatrix) -> CVector {
        let s = 1.0 / (self.d_ref as f64).sqrt();
        CVector::from_fn(self.d_ref * self.d_out, |i, _| v[(i % self.d_out, i / self.d_out)] * s)
    }

    fn model(&self, t: &Terms) -> CMatrix {
        let d = self.target.nrows();
        let mut m = CMatrix::zeros(d, d);
        for (v, &w) in t.vecs.iter().zip(&t.w) {
            if w > 0.0 {
                m += v * v.adjoint() * real(w);
            }
        }
        m
    }

    fn distance(&self, t: &Terms) -> f64 {
        trace_norm(&hermitize(&(&self.target - self.model(t))))
    }

    /// Objective with term `i` replaced by weight `w` and vector `v`;
    /// `rest` is the target minus every other term.
    fn eval(&self, obj: Obj, rest: &CMatrix, rest_sq: f64, w: f64, v: &CVector) -> f64 {
        match obj {
            Obj::Hs => {
                let evv = v.dotc(&(rest * v)).re;
                rest_sq - 2.0 * w * evv + w * w * v.norm_squared().powi(2)
            }
            Obj::Trace => trace_norm(&hermitize(&(rest - v * v.adjoint() * real(w)))),
        }
    }

    fn rotate(&self, v: &CMatrix, g: Gen, t: f64) -> CMatrix {
        let mut out = v.clone();
        let (s, c) = t.sin_cos();
        let lines = if self.left { v.ncols() } else { v.nrows() };
        let get = |m: &CMatrix, line: usize, x: usize| if self.left { m[(line, x)] } else { m[(x, line)] };
        let mut set = |line: usize, x: usize, z: C64| {
            if self.left {
                out[(line, x)] = z
            } else {
                out[(x, line)] = z
            }
        };
        for x in 0..lines {
            match g {
                Gen::Phase(j) => set(j, x, get(v, j, x) * C64::from_polar(1.0, t)),
                Gen::Real(j, k) => {
                    let (a, b) = (get(v, j, x), get(v, k, x));
                    set(j, x, a * c - b * s);
                    set(k, x, a * s + b * c);
                }
                Gen::Imag(j, k) => {
                    let (a, b) = (get(v, j, x), get(v, k, x));
                    let is = C64::new(0.0, s);
                    set(j, x, a * c + b * is);
                    set(k, x, a * is + b * c);
                }
            }
        }
        out
    }

    /// One sweep over all term coordinates and weight pairs. Returns the
    /// objective afterwards.
    fn sweep(&self, obj: Obj, t: &mut Terms) -> f64 {
        use std::f64::consts::PI;
        let k = t.ops.len();
        let mut model = self.model(t);
        for i in 0..k {
            let w = t.w[i];
            if w <= 0.0 {
                continue;
            }
            let rest = &self.target - (&model - &t.vecs[i] * t.vecs[i].adjoint() * real(w));
            let rest_sq = rest.norm_squared();
            for &g in &self.gens {
                let f = |th: f64| self.eval(obj, &rest, rest_sq, w, &self.vec_of(&self.rotate(&t.ops[i], g, th)));
                let f0 = f(0.0);
                let mut best = (0.0, f0);
                for s in 0..12 {
                    let th = -PI + s as f64 * PI / 6.0;
                    let v = f(th);
                    if v < best.1 {
                        best = (th, v);
                    }
                }
                let (th, v) = golden_min(&f, best.0 - PI / 6.0, best.0 + PI / 6.0, 40);
                if v < best.1 {
                    best = (th, v);
                }
                if best.1 < f0 {
                    t.ops[i] = self.rotate(&t.ops[i], g, best.0);
                    t.vecs[i] = self.vec_of(&t.ops[i]);
                }
            }
            model = &self.target - &rest + &t.vecs[i] * t.vecs[i].adjoint() * real(w);
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let (wi, wj) = (t.w[i], t.w[j]);
                if wi + wj <= 0.0 {
                    continue;
                }
                let pi = &t.vecs[i] * t.vecs[i].adjoint();
                let pj = &t.vecs[j] * t.vecs[j].adjoint();
                let diff = &pi - &pj;
                let resid = &self.target - &model;
                // move s from j to i, s ∈ [−w_i, w_j]
                let s = match obj {
                    Obj::Hs => {
                        let dd = diff.norm_squared();
                        if dd <= 1e-300 {
                            0.0
                        } else {
                            (resid.dotc(&diff).re / dd).clamp(-wi, wj)
                        }
                    }
                    Obj::Trace => {
                        let f = |s: f64| trace_norm(&hermitize(&(&resid - &diff * real(s))));
                        let (s, v) = golden_min(&f, -wi, wj, 50);
                        if v < f(0.0) {
                            s
                        } else {
                            0.0
                        }
                    }
                };
                if s != 0.0 {
                    t.w[i] = (wi + s).max(0.0);
                    t.w[j] = (wj - s).max(0.0);
                    model += &diff * real(s);
                }
            }
        }
        match obj {
            Obj::Hs => (&self.target - &model).norm_squared(),
            Obj::Trace => trace_norm(&hermitize(&(&self.target - &model))),
        }
    }

    fn optimize(&self, obj: Obj, t: &mut Terms, sweeps: usize) {
        let mut last = f64::INFINITY;
        for _ in 0..sweeps {
            let v = self.sweep(obj, t);
            if last - v <= 1e-13 * last.max(1e-300) {
                break;
            }
            last = v;
        }
    }

    /// Nearest (co-)isometry to the operator of the residual's top
    /// eigenvector, with that eigenvalue.
    fn greedy_term(&self, t: &Terms) -> (CMatrix, f64) {
        let resid = hermitize(&(&self.target - self.model(t)));
        let e = eig_hermitian_unchecked(&resid);
        let top = e.vectors.column(0);
        let s = (self.d_ref as f64).sqrt();
        let x = CMatrix::from_fn(self.d_out, self.d_ref, |b, r| top[r * self.d_out + b] * s);
        let svd = x.svd(true, true);
        let u = svd.u.expect("u requested");
        let vt = svd.v_t.expect("v_t requested");
        (u * vt, e.values[0])
    }

    fn random_op(&self, rng: &mut ProtocolRng) -> CMatrix {
        let m = self.d_out.max(self.d_ref);
        haar_unitary(m, rng).view((0, 0), (self.d_out, self.d_ref)).into_owned()
    }

    /// Ladder over `k = 1, …, k_terms` for one restart.
    fn run(&self, opts: &FitOptions, rng: &mut ProtocolRng) -> (Terms, Vec<f64>) {
        let op = self.random_op(rng);
        let mut best = Terms {
            vecs: vec![self.vec_of(&op)],
            ops: vec![op],
            w: vec![1.0],
        };
        self.optimize(Obj::Hs, &mut best, opts.hs_sweeps);
        self.optimize(Obj::Trace, &mut best, opts.polish_sweeps);
        let mut ladder = vec![self.distance(&best)];
        for _ in 1..opts.k_terms {
            let (op, lam) = self.greedy_term(&best);
            // a random fallback keeps the stream aligned across stages
            let fallback = self.random_op(rng);
            let op = if lam > 1e-12 { op } else { fallback };
            let eps = lam.clamp(0.01, 0.5);
            let mut cand = best.clone();
            for w in cand.w.iter_mut() {
                *w *= 1.0 - eps;
            }
            cand.vecs.push(self.vec_of(&op));
            cand.ops.push(op);
            cand.w.push(eps);
            self.optimize(Obj::Hs, &mut cand, opts.hs_sweeps);
            self.optimize(Obj::Trace, &mut cand, opts.polish_sweeps);
            let prev = *ladder.last().expect("nonempty");
            if self.distance(&cand) <= prev {
                best = cand;
            } else {
                best.vecs.push(self.vec_of(&cand.ops[cand.ops.len() - 1]));
                best.ops.push(cand.ops[cand.ops.len() - 1].clone());
                best.w.push(0.0);
            }
            ladder.push(self.distance(&best));
        }
        (best, ladder)
    }
}

/// Minimum of `f` on `[lo, hi]` by golden-section search.
fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 > f2 {
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
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best mixture of `k_terms` (co-)isometries over `restarts` restarts.
pub fn fit_unitary_mixture(t: &QuantumChannel, opts: &FitOptions) -> Result<FitReport> {
    if opts.n_copies == 0 || opts.k_terms == 0 || opts.restarts == 0 {
        return Err(Error::OutOfRange("n_copies, k_terms and restarts must be at least 1".into()));
    }
    let tn = t.tensor_power(opts.n_copies)?;
    let d_ref = tn.d_in();
    let d_out = tn.d_out();
    let dim = (d_ref * d_out) as u128;
    if dim > MAX_CHOI_DIM {
        return Err(Error::SizeCap {
            what: "Choi dimension".into(),
            size: dim,
            cap: MAX_CHOI_DIM,
        });
    }
    let target = choi(&tn, &maximally_entangled(d_ref))?.state.matrix().clone();
    let left = d_out >= d_ref;
    let m = if left { d_out } else { d_ref };
    let mut gens: Vec<Gen> = (0..m).map(Gen::Phase).collect();
    for j in 0..m {
        for k in (j + 1)..m {
            gens.push(Gen::Real(j, k));
            gens.push(Gen::Imag(j, k));
        }
    }
    let fitter = Fitter {
        target,
        d_ref,
        d_out,
        left,
        gens,
    };
    let one = |r: usize| {
        let mut rng = trial_rng(opts.seed, r as u64);
        fitter.run(opts, &mut rng)
    };
    let results: Vec<(Terms, Vec<f64>)> = if opts.parallel {
        (0..opts.restarts).into_par_iter().map(one).collect()
    } else {
        (0..opts.restarts).map(one).collect()
    };
    let dists: Vec<f64> = results.iter().map(|r| *r.1.last().expect("nonempty")).collect();
    let mut best = 0;
    for (i, &d) in dists.iter().enumerate() {
        if d < dists[best] {
            best = i;
        }
    }
    let (terms, ladder) = &results[best];
    Ok(FitReport {
        metric: "fixed-source trace norm ‖ρ_T^{⊗n} − (id⊗T')φ^{⊗n}‖₁ with maximally entangled φ (not the cb-norm)".into(),
        distance: dists[best],
        n_copies: opts.n_copies,
        k_terms: opts.k_terms,
        unitary: d_ref == d_out,
        mixture: Mixture {
            weights: terms.w.clone(),
            operators: terms.ops.clone(),
        },
        best_restart: best,
        restart_distances: dists,
        ladder: ladder.clone(),
    })
}
