use crate::error::{Error, Result};

use super::layout::Layout;
use super::linalg::{
    eig_hermitian_unchecked, hermitian_eigenvalues, hermiticity_error, hermitize, kron_vec, max_abs,
    shannon_entropy, trace_norm, CMatrix, CVector, HermitianEigen, CLIP_TOL, HERMITIAN_TOL, ZERO,
};

/// Normalization tolerance for pure states and density operators.
pub const NORM_TOL: f64 = 1e-12;

/// Descending list of probabilities (eigenvalues or squared Schmidt
/// coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Clip numerical negatives and overshoots into `[0, 1]` and sort.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Self {
        for v in values.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Spectrum(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.0)
    }

    /// Drop trailing values at or below `tol`.
    pub fn truncated(&self, tol: f64) -> Spectrum {
        Spectrum(self.0.iter().copied().filter(|&v| v > tol).collect())
    }

    /// Number of values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.0.iter().filter(|&&v| v > tol).count()
    }
}

/// Normalized state vector on a labelled register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    layout: Layout,
}

impl PureState {
    pub fn new(layout: Layout, amplitudes: CVector) -> Result<Self> {
        if layout.dim() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: amplitudes.len(),
            });
        }
        let n2 = amplitudes.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(PureState { amplitudes, layout })
    }

    /// Normalize `amplitudes`; fails on the zero vector.
    pub fn from_unnormalized(layout: Layout, amplitudes: CVector) -> Result<Self> {
        if layout.dim() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: amplitudes.len(),
            });
        }
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(PureState {
            amplitudes: amplitudes.unscale(n),
            layout,
        })
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(layout: Layout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() || digits.iter().zip(layout.dims()).any(|(&i, d)| i >= d) {
            return Err(Error::OutOfRange(format!("basis digits {digits:?}")));
        }
        let mut v = CVector::zeros(layout.dim());
        v[layout.index(digits)] = super::linalg::ONE;
        Ok(PureState {
            amplitudes: v,
            layout,
        })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, digits: &[usize]) -> super::linalg::C64 {
        self.amplitudes[self.layout.index(digits)]
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            layout: self.layout.clone(),
        }
    }

    /// Coefficient matrix `M[g, r]` with rows indexed by `group` (layout
    /// order) and columns by the remaining parties.
    pub fn coefficient_matrix<S: AsRef<str>>(&self, group: &[S]) -> Result<CMatrix> {
        let pos = self.layout.positions_of(group)?;
        Ok(self.coefficient_matrix_at(&pos))
    }

    pub(crate) fn coefficient_matrix_at(&self, pos: &[usize]) -> CMatrix {
        let gdim: usize = pos.iter().map(|&k| self.layout.parties()[k].dim).product();
        let rdim = self.dim() / gdim;
        let mut m = CMatrix::zeros(gdim, rdim);
        if pos.iter().enumerate().all(|(i, &k)| i == k) {
            // leading parties: plain row-major reshape
            for g in 0..gdim {
                for r in 0..rdim {
                    m[(g, r)] = self.amplitudes[g * rdim + r];
                }
            }
            return m;
        }
        let (gi, ri) = self.layout.split_indices(pos);
        for (i, a) in self.amplitudes.iter().enumerate() {
            m[(gi[i], ri[i])] = *a;
        }
        m
    }

    /// Reduced density operator on `keep`.
    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let pos = self.layout.positions_of(keep)?;
        if pos.is_empty() {
            return Err(Error::InvalidPartition("empty set of kept parties".into()));
        }
        let m = self.coefficient_matrix_at(&pos);
        Ok(DensityOperator {
            matrix: &m * m.adjoint(),
            layout: self.layout.select(&pos),
        })
    }

    /// Reorder parties to the given label order.
    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<PureState> {
        let ord = self.layout.order_of(order)?;
        let (layout, map) = self.layout.permutation_map(&ord);
        let amplitudes = CVector::from_iterator(map.len(), map.iter().map(|&o| self.amplitudes[o]));
        Ok(PureState { amplitudes, layout })
    }

    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<PureState> {
        Ok(PureState {
            amplitudes: self.amplitudes.clone(),
            layout: self.layout.relabeled(labels)?,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<super::linalg::C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Crate-internal constructor that skips validation.
    pub(crate) fn from_parts(layout: Layout, amplitudes: CVector) -> Self {
        debug_assert_eq!(layout.dim(), amplitudes.len());
        PureState { amplitudes, layout }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: Layout,
}

impl DensityOperator {
    /// Validates Hermiticity (1e-12), positivity (−1e-10) and trace (1e-12).
    pub fn new(layout: Layout, matrix: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        let herr = hermiticity_error(&matrix);
        if herr > NORM_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian(herr));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let matrix = hermitize(&matrix);
        let min = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(0.0);
        if min < -CLIP_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityOperator { matrix, layout })
    }

    /// `I/d` on a layout.
    pub fn maximally_mixed(layout: Layout) -> Self {
        let d = layout.dim();
        DensityOperator {
            matrix: CMatrix::identity(d, d) / super::linalg::real(d as f64),
            layout,
        }
    }

    pub(crate) fn from_parts(layout: Layout, matrix: CMatrix) -> Self {
        debug_assert_eq!(layout.dim(), matrix.nrows());
        DensityOperator {
            matrix: hermitize(&matrix),
            layout,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigen-decomposition, eigenvalues descending.
    pub fn eigen(&self) -> HermitianEigen {
        eig_hermitian_unchecked(&self.matrix)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_eigenvalues(hermitian_eigenvalues(&self.matrix))
    }

    /// Partial trace keeping `keep` (in layout order).
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let pos = self.layout.positions_of(keep)?;
        if pos.is_empty() {
            return Err(Error::InvalidPartition("empty set of kept parties".into()));
        }
        Ok(self.partial_trace_at(&pos))
    }

    pub(crate) fn partial_trace_at(&self, pos: &[usize]) -> DensityOperator {
        let layout = self.layout.select(pos);
        let kdim = layout.dim();
        let rdim = self.dim() / kdim;
        let (gi, ri) = self.layout.split_indices(pos);
        // table[k * rdim + r] = global index
        let mut table = vec![0usize; kdim * rdim];
        for i in 0..self.dim() {
            table[gi[i] * rdim + ri[i]] = i;
        }
        let mut out = CMatrix::zeros(kdim, kdim);
        for k1 in 0..kdim {
            for k2 in k1..kdim {
                let mut acc = ZERO;
                for r in 0..rdim {
                    acc += self.matrix[(table[k1 * rdim + r], table[k2 * rdim + r])];
                }
                out[(k1, k2)] = acc;
                out[(k2, k1)] = acc.conj();
            }
        }
        DensityOperator {
            matrix: out,
            layout,
        }
    }

    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityOperator> {
        let ord = self.layout.order_of(order)?;
        let (layout, map) = self.layout.permutation_map(&ord);
        let n = map.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DensityOperator { matrix, layout })
    }

    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityOperator> {
        Ok(DensityOperator {
            matrix: self.matrix.clone(),
            layout: self.layout.relabeled(labels)?,
        })
    }

    /// Purity `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Kronecker product of two objects of the same kind; layouts concatenate.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(PureState {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            layout: self.layout.concat(&other.layout)?,
        })
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(DensityOperator {
            matrix: self.matrix.kronecker(&other.matrix),
            layout: self.layout.concat(&other.layout)?,
        })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

pub fn partial_trace<S: AsRef<str>>(rho: &DensityOperator, keep: &[S]) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.spectrum().entropy()
}

/// Squared Schmidt coefficients across `left | rest`, descending; length is
/// the smaller side dimension.
pub fn schmidt<S: AsRef<str>>(psi: &PureState, left: &[S]) -> Result<Spectrum> {
    let pos = psi.layout.positions_of(left)?;
    if pos.is_empty() || pos.len() == psi.layout.len() {
        return Err(Error::InvalidPartition(
            "a cut needs parties on both sides".into(),
        ));
    }
    Ok(schmidt_at(psi, &pos))
}

pub(crate) fn schmidt_at(psi: &PureState, pos: &[usize]) -> Spectrum {
    let m = psi.coefficient_matrix_at(pos);
    let g = if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    Spectrum::from_eigenvalues(hermitian_eigenvalues(&g))
}

/// Entropy of entanglement across `left | rest`.
pub fn entanglement_entropy<S: AsRef<str>>(psi: &PureState, left: &[S]) -> Result<f64> {
    Ok(schmidt(psi, left)?.entropy())
}

/// `‖ρ − σ‖₁` (sum of absolute eigenvalues, range [0, 2]).
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    Ok(trace_norm(&(&rho.matrix - &sigma.matrix)))
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(psi: &PureState, rho: &DensityOperator) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            got: rho.dim(),
        });
    }
    let v = &rho.matrix * &psi.amplitudes;
    Ok(psi.amplitudes.dotc(&v).re.clamp(0.0, 1.0))
}

/// Hermiticity check usable on raw matrices (relative tolerance).
pub fn is_hermitian(m: &CMatrix) -> bool {
    hermiticity_error(m) <= HERMITIAN_TOL * max_abs(m).max(1.0)
}
