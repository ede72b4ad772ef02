//! Helper-conditional decomposition of a pure state and its `n`-copy
//! bookkeeping.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::holevo_chi;
use crate::qcore::linalg::{kron_vec, CMatrix, CVector};
use crate::qcore::{Layout, PureState};
use crate::states::{Ensemble, DROP_TOL};

use super::types::{copies_layout, copy_labels};

/// `ψ = Σ_j |v_j⟩ ⊗ |u_j⟩` for an orthonormal helper basis `{u_j}`, with
/// `q_j = ‖v_j‖²`. The non-helper ("rest") parties keep their layout order.
#[derive(Clone, Debug)]
pub struct Source {
    rest: Layout,
    helper_dim: usize,
    vectors: Vec<CVector>,
    q: Vec<f64>,
}

impl Source {
    /// Decompose `psi` by measuring the `helper` parties (jointly) in the
    /// columns of `basis`, or in the computational basis when `None`.
    pub fn new<S: AsRef<str>>(psi: &PureState, helper: &[S], basis: Option<&CMatrix>) -> Result<Self> {
        let layout = psi.layout();
        let hp = layout.positions_of(helper)?;
        if hp.is_empty() || hp.len() == layout.len() {
            return Err(Error::InvalidPartition("helper must be a proper nonempty subset".into()));
        }
        let rp = layout.complement(&hp);
        let rest = layout.select(&rp);
        let m = psi.coefficient_matrix_at(&rp);
        let dh = m.ncols();
        let m = match basis {
            None => m,
            Some(u) => {
                if u.nrows() != dh || u.ncols() != dh {
                    return Err(Error::DimensionMismatch { expected: dh, got: u.nrows() });
                }
                let err = (u.adjoint() * u - CMatrix::identity(dh, dh)).norm();
                if err > 1e-10 {
                    return Err(Error::OutOfRange(format!("helper basis is not unitary ({err:.3e})")));
                }
                m * u.conjugate()
            }
        };
        let vectors: Vec<CVector> = (0..dh).map(|j| m.column(j).into_owned()).collect();
        let q = vectors.iter().map(|v| v.norm_squared()).collect();
        Ok(Source {
            rest,
            helper_dim: dh,
            vectors,
            q,
        })
    }

    pub fn rest_layout(&self) -> &Layout {
        &self.rest
    }

    pub fn alphabet(&self) -> usize {
        self.helper_dim
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }

    /// Unnormalized conditional vector `v_j`.
    pub fn vector(&self, j: usize) -> &CVector {
        &self.vectors[j]
    }

    /// The ensemble `{(q_j, v_j/‖v_j‖)}` with null branches dropped.
    pub fn ensemble(&self) -> Result<Ensemble> {
        let total: f64 = self.q.iter().filter(|&&q| q > DROP_TOL).sum();
        let mut entries = Vec::new();
        for (v, &q) in self.vectors.iter().zip(&self.q) {
            if q > DROP_TOL {
                entries.push((q / total, PureState::from_unnormalized(self.rest.clone(), v.clone())?));
            }
        }
        Ensemble::new(entries)
    }

    /// Holevo quantity of the ensemble on the given rest parties.
    pub fn chi<S: AsRef<str>>(&self, marginal: &[S]) -> Result<f64> {
        holevo_chi(&self.ensemble()?, marginal)
    }

    /// `Σ_j q_j E(v_j/‖v_j‖)` across `left | rest`.
    pub fn conditional_entropies<S: AsRef<str>>(&self, left: &[S]) -> Result<Vec<f64>> {
        let pos = self.rest.positions_of(left)?;
        self.vectors
            .iter()
            .zip(&self.q)
            .map(|(v, &q)| {
                if q <= DROP_TOL {
                    return Ok(0.0);
                }
                let s = PureState::from_unnormalized(self.rest.clone(), v.clone())?;
                Ok(crate::qcore::schmidt_at(&s, &pos).entropy())
            })
            .collect()
    }

    /// Sample a sequence from `q^{⊗n}`.
    pub fn sample_sequence<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let total: f64 = self.q.iter().sum();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut last = 0;
                for (j, &q) in self.q.iter().enumerate() {
                    if q > 0.0 {
                        last = j;
                        acc += q;
                        if u < acc {
                            return j;
                        }
                    }
                }
                last
            })
            .collect()
    }

    /// `Π_k q_{J_k}`.
    pub fn sequence_probability(&self, seq: &[usize]) -> f64 {
        seq.iter().map(|&j| self.q[j]).product()
    }
}

/// Party-major layout of `n` copies of the rest parties and the map from
/// party-major to copy-major (plain tensor power) indices.
#[derive(Clone, Debug)]
pub struct Copies {
    layout: Layout,
    n: usize,
    to_copy_major: Vec<usize>,
}

impl Copies {
    pub fn new(rest: &Layout, n: usize) -> Result<Self> {
        let layout = copies_layout(rest, n)?;
        let m = rest.len();
        let dims = rest.dims();
        let mut to_copy_major = Vec::with_capacity(layout.dim());
        for i in 0..layout.dim() {
            let d = layout.digits(i);
            // party-major digit (p, k) sits at p*n + k; copy-major at k*m + p
            let mut idx = 0;
            for k in 0..n {
                for p in 0..m {
                    idx = idx * dims[p] + d[p * n + k];
                }
            }
            to_copy_major.push(idx);
        }
        Ok(Copies {
            layout,
            n,
            to_copy_major,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Party-major vector of `⊗_k v_{J_k}`.
    pub fn product(&self, src: &Source, seq: &[usize]) -> CVector {
        let mut cm = src.vector(seq[0]).clone();
        for &j in &seq[1..] {
            cm = kron_vec(&cm, src.vector(j));
        }
        CVector::from_iterator(self.dim(), self.to_copy_major.iter().map(|&i| cm[i]))
    }

    /// Labels of every copy of the given rest parties.
    pub fn labels<S: AsRef<str>>(&self, parties: &[S]) -> Vec<String> {
        parties
            .iter()
            .flat_map(|p| copy_labels(p.as_ref(), self.n))
            .collect()
    }
}

/// For a group of parties with the given local dimensions laid out
/// party-major over `n` copies, the index map `y ↦ x` of the operator that
/// moves old copy `sigma[k]` into slot `k`.
pub fn copy_permutation(dims: &[usize], n: usize, sigma: &[usize]) -> Vec<usize> {
    let mut full_dims = Vec::with_capacity(dims.len() * n);
    for &d in dims {
        full_dims.extend(std::iter::repeat_n(d, n));
    }
    let total: usize = full_dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut y_digits = vec![0usize; full_dims.len()];
    let mut x_digits = vec![0usize; full_dims.len()];
    for y in 0..total {
        let mut r = y;
        for (slot, d) in full_dims.iter().enumerate().rev() {
            y_digits[slot] = r % d;
            r /= d;
        }
        for p in 0..dims.len() {
            for k in 0..n {
                x_digits[p * n + sigma[k]] = y_digits[p * n + k];
            }
        }
        out.push(x_digits.iter().zip(&full_dims).fold(0, |acc, (x, d)| acc * d + x));
    }
    out
}

/// `σ` with `target[k] = seq[σ(k)]`, matching equal letters in order.
pub fn sorting_permutation(seq: &[usize], target: &[usize]) -> Vec<usize> {
    let mut used = vec![false; seq.len()];
    target
        .iter()
        .map(|&t| {
            let k = (0..seq.len())
                .find(|&k| !used[k] && seq[k] == t)
                .expect("target is a rearrangement of seq");
            used[k] = true;
            k
        })
        .collect()
}
