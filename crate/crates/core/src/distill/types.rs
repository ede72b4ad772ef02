//! Type classes, type projectors, codes and Fourier code states.
//!
//! Sequences `J = (j_1, …, j_n)` index the computational basis of the
//! helper's `n` copies with the first copy most significant, so the
//! lexicographic order on sequences is the basis index order.

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{real, CMatrix, CVector, C64};
use crate::qcore::{Layout, PureState};

/// Default cap on the number of sequences any enumeration may touch.
pub const DEFAULT_SEQUENCE_CAP: u128 = 1 << 22;

/// `C(n, k)` as `u128`, `None` on overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Natural log of `C(n, k)`.
pub fn ln_binomial(n: u128, k: u128) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: u128) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Set of length-`n` sequences with fixed letter counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TypeClass {
    counts: Vec<usize>,
    n: usize,
}

impl TypeClass {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 || counts.is_empty() {
            return Err(Error::OutOfRange("a type needs n ≥ 1".into()));
        }
        Ok(TypeClass { counts, n })
    }

    /// The type of a sequence over an alphabet of the given size.
    pub fn of(seq: &[usize], alphabet: usize) -> Result<Self> {
        let mut counts = vec![0; alphabet];
        for &j in seq {
            if j >= alphabet {
                return Err(Error::OutOfRange(format!("letter {j} outside alphabet of size {alphabet}")));
            }
            counts[j] += 1;
        }
        TypeClass::new(counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `P(j) = counts[j] / n`.
    pub fn distribution(&self) -> Vec<f64> {
        self.counts.iter().map(|&k| k as f64 / self.n as f64).collect()
    }

    /// Multinomial `n! / Π counts[j]!`.
    pub fn size(&self) -> u128 {
        let mut left = self.n as u128;
        let mut acc: u128 = 1;
        for &k in &self.counts {
            acc = acc.saturating_mul(binomial(left, k as u128).unwrap_or(u128::MAX));
            left -= k as u128;
        }
        acc
    }

    /// The lexicographically first member (letters in ascending order).
    pub fn first(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.n);
        for (j, &k) in self.counts.iter().enumerate() {
            s.extend(std::iter::repeat_n(j, k));
        }
        s
    }

    pub fn contains(&self, seq: &[usize]) -> bool {
        TypeClass::of(seq, self.alphabet()).is_ok_and(|t| &t == self)
    }

    /// All members in lexicographic order.
    pub fn members(&self, cap: u128) -> Result<Vec<Vec<usize>>> {
        let m = self.size();
        if m > cap {
            return Err(Error::SizeCap {
                what: "type class size".into(),
                size: m,
                cap,
            });
        }
        let mut out = Vec::with_capacity(m as usize);
        let mut s = self.first();
        loop {
            out.push(s.clone());
            if !next_permutation(&mut s) {
                break;
            }
        }
        Ok(out)
    }

    /// Natural log of `Σ_{J ∈ T_P} q^n(J) = M · Π q_j^{counts[j]}`.
    pub fn ln_probability(&self, q: &[f64]) -> f64 {
        let mut acc = ln_multinomial(&self.counts);
        for (&k, &p) in self.counts.iter().zip(q) {
            if k > 0 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                acc += k as f64 * p.ln();
            }
        }
        acc
    }

    /// `‖P − q‖₁`.
    pub fn l1_distance(&self, q: &[f64]) -> f64 {
        self.distribution().iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
    }
}

fn ln_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    ln_factorial(n as u128) - counts.iter().map(|&k| ln_factorial(k as u128)).sum::<f64>()
}

/// Advance to the next lexicographic permutation of a multiset.
fn next_permutation(s: &mut [usize]) -> bool {
    if s.len() < 2 {
        return false;
    }
    let mut i = s.len() - 1;
    while i > 0 && s[i - 1] >= s[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = s.len() - 1;
    while s[j] <= s[i - 1] {
        j -= 1;
    }
    s.swap(i - 1, j);
    s[i..].reverse();
    true
}

fn compositions(n: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(n);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=n).rev() {
        prefix.push(k);
        compositions(n - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Every type of length-`n` sequences over `alphabet` letters, ordered by
/// descending counts. Refuses when `alphabet^n` exceeds `cap`.
pub fn enumerate_types(n: usize, alphabet: usize, cap: u128) -> Result<Vec<TypeClass>> {
    if n == 0 || alphabet == 0 {
        return Err(Error::OutOfRange("need n ≥ 1 and a nonempty alphabet".into()));
    }
    let total = (alphabet as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::SizeCap {
            what: "sequence count".into(),
            size: total,
            cap,
        });
    }
    let mut out = Vec::new();
    compositions(n, alphabet, &mut Vec::new(), &mut out);
    out.into_iter().map(TypeClass::new).collect()
}

/// Basis index of a sequence (first letter most significant).
pub fn sequence_index(seq: &[usize], alphabet: usize) -> usize {
    seq.iter().fold(0, |acc, &j| acc * alphabet + j)
}

/// `Π(P)`: diagonal projector onto the span of the type class.
pub fn type_projector(t: &TypeClass, cap: u128) -> Result<CMatrix> {
    let d = t.alphabet().pow(t.n() as u32);
    let mut p = CMatrix::zeros(d, d);
    for s in t.members(cap)? {
        let i = sequence_index(&s, t.alphabet());
        p[(i, i)] = real(1.0);
    }
    Ok(p)
}

/// `N` distinct same-type sequences `J^(0), …, J^(N−1)`.
#[derive(Clone, Debug, Serialize)]
pub struct Code {
    parent: TypeClass,
    members: Vec<Vec<usize>>,
}

impl Code {
    pub fn new(parent: TypeClass, members: Vec<Vec<usize>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::OutOfRange("a code needs at least one member".into()));
        }
        for (k, m) in members.iter().enumerate() {
            if m.len() != parent.n() || !parent.contains(m) {
                return Err(Error::OutOfRange(format!("code member {m:?} is not of the parent type")));
            }
            if members[..k].contains(m) {
                return Err(Error::OutOfRange(format!("duplicate code member {m:?}")));
            }
        }
        Ok(Code { parent, members })
    }

    /// A uniformly random `N`-subset of the type class, members in
    /// lexicographic order.
    pub fn random<R: Rng + ?Sized>(parent: &TypeClass, size: usize, cap: u128, rng: &mut R) -> Result<Self> {
        let all = parent.members(cap)?;
        if size == 0 || size > all.len() {
            return Err(Error::OutOfRange(format!("code size {size} not in 1..={}", all.len())));
        }
        let mut idx = sample(rng, all.len(), size).into_vec();
        idx.sort_unstable();
        Ok(Code {
            parent: parent.clone(),
            members: idx.into_iter().map(|i| all[i].clone()).collect(),
        })
    }

    pub fn parent(&self) -> &TypeClass {
        &self.parent
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Fourier phase `e^{2πi·αβ/N}`.
pub fn fourier_phase(alpha: usize, beta: usize, n: usize) -> C64 {
    let k = (alpha * beta) % n;
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// `t_𝒥(α) = N^{-1/2} Σ_β e^{2πiαβ/N} |J^(β)⟩` as a vector on the
/// helper's `n` copies.
pub fn fourier_vector(code: &Code, alpha: usize) -> Result<CVector> {
    let n = code.len();
    if alpha >= n {
        return Err(Error::OutOfRange(format!("α = {alpha} not below N = {n}")));
    }
    let t = code.parent();
    let d = t.alphabet().pow(t.n() as u32);
    let mut v = CVector::zeros(d);
    let s = 1.0 / (n as f64).sqrt();
    for (beta, m) in code.members().iter().enumerate() {
        v[sequence_index(m, t.alphabet())] += fourier_phase(alpha, beta, n) * s;
    }
    Ok(v)
}

/// [`fourier_vector`] as a state on parties `{label}.1 … {label}.n`.
pub fn fourier_state(code: &Code, alpha: usize, label: &str) -> Result<PureState> {
    let v = fourier_vector(code, alpha)?;
    let t = code.parent();
    let layout = copies_layout(&Layout::single(label, t.alphabet()), t.n())?;
    PureState::new(layout, v)
}

/// `c = N / C(M−1, N−1)`: the weight making `(c/N) Σ_{𝒥,α} |t_𝒥(α)⟩⟨t_𝒥(α)|`
/// equal `Π(P)` (each sequence lies in `C(M−1, N−1)` codes).
pub fn povm_constant(t: &TypeClass, n_code: usize) -> Result<f64> {
    let m = t.size();
    if n_code == 0 || n_code as u128 > m {
        return Err(Error::OutOfRange(format!("N = {n_code} not in 1..={m}")));
    }
    let ln = ln_binomial(m - 1, n_code as u128 - 1);
    Ok(n_code as f64 * (-ln).exp())
}

/// Layout of `n` copies, party-major: `X.1, …, X.n, Y.1, …`.
pub fn copies_layout(layout: &Layout, n: usize) -> Result<Layout> {
    let mut parties = Vec::with_capacity(layout.len() * n);
    for p in layout.parties() {
        for k in 1..=n {
            parties.push(crate::qcore::Party::new(format!("{}.{k}", p.label), p.dim));
        }
    }
    Layout::new(parties)
}

/// Labels of the `n` copies of `label`.
pub fn copy_labels(label: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{label}.{k}")).collect()
}
