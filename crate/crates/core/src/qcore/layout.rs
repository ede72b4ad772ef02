use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labelled tensor factor of a register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub label: String,
    pub dim: usize,
}

impl Party {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Party {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered list of parties. The first party is the most significant digit of
/// the global basis index: `i = Σ_k i_k · Π_{l>k} d_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    parties: Vec<Party>,
}

impl Layout {
    pub fn new(parties: Vec<Party>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidLayout("no parties".into()));
        }
        for (k, p) in parties.iter().enumerate() {
            if p.dim == 0 {
                return Err(Error::InvalidLayout(format!("party `{}` has dimension 0", p.label)));
            }
            if parties[..k].iter().any(|q| q.label == p.label) {
                return Err(Error::DuplicateParty(p.label.clone()));
            }
        }
        Ok(Layout { parties })
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Layout::new(pairs.iter().map(|&(l, d)| Party::new(l, d)).collect())
    }

    /// Single-party layout.
    pub fn single(label: &str, dim: usize) -> Self {
        Layout {
            parties: vec![Party::new(label, dim)],
        }
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p.dim).collect()
    }

    /// Total Hilbert space dimension.
    pub fn dim(&self) -> usize {
        self.parties.iter().map(|p| p.dim).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parties.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parties
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownParty(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.parties.iter().any(|p| p.label == label)
    }

    pub fn party(&self, label: &str) -> Result<&Party> {
        Ok(&self.parties[self.position(label)?])
    }

    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut parties = self.parties.clone();
        parties.extend(other.parties.iter().cloned());
        Layout::new(parties)
    }

    /// Sub-layout of the given positions, kept in layout order.
    pub(crate) fn select(&self, positions: &[usize]) -> Layout {
        let mut pos = positions.to_vec();
        pos.sort_unstable();
        Layout {
            parties: pos.iter().map(|&k| self.parties[k].clone()).collect(),
        }
    }

    /// Resolve labels to sorted, deduplicated positions.
    pub(crate) fn positions_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let k = self.position(l.as_ref())?;
            if out.contains(&k) {
                return Err(Error::DuplicateParty(l.as_ref().to_string()));
            }
            out.push(k);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Positions not in `positions`.
    pub(crate) fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|k| !positions.contains(k)).collect()
    }

    /// Local digits of a global index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (k, p) in self.parties.iter().enumerate().rev() {
            out[k] = index % p.dim;
            index /= p.dim;
        }
        out
    }

    /// Global index of local digits.
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.parties)
            .fold(0, |acc, (&i, p)| acc * p.dim + i)
    }

    /// For each global index, its (index within `group`, index within the
    /// rest); both sub-registers ordered as in this layout.
    pub(crate) fn split_indices(&self, group: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let rest = self.complement(group);
        let dims = self.dims();
        let total = self.dim();
        let mut g_idx = Vec::with_capacity(total);
        let mut r_idx = Vec::with_capacity(total);
        for i in 0..total {
            let d = self.digits(i);
            g_idx.push(group.iter().fold(0, |acc, &k| acc * dims[k] + d[k]));
            r_idx.push(rest.iter().fold(0, |acc, &k| acc * dims[k] + d[k]));
        }
        (g_idx, r_idx)
    }

    /// Map from new global index to old global index when reordering the
    /// parties by `order` (positions in this layout).
    pub(crate) fn permutation_map(&self, order: &[usize]) -> (Layout, Vec<usize>) {
        let new = Layout {
            parties: order.iter().map(|&k| self.parties[k].clone()).collect(),
        };
        let total = self.dim();
        let mut map = vec![0; total];
        for (j, slot) in map.iter_mut().enumerate() {
            let nd = new.digits(j);
            let mut od = vec![0; self.len()];
            for (pos, &k) in order.iter().enumerate() {
                od[k] = nd[pos];
            }
            *slot = self.index(&od);
        }
        (new, map)
    }

    /// Resolve a label order that must be a permutation of this layout.
    pub(crate) fn order_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        if labels.len() != self.len() {
            return Err(Error::InvalidPartition(format!(
                "reordering names {} parties, layout has {}",
                labels.len(),
                self.len()
            )));
        }
        let mut order = Vec::with_capacity(labels.len());
        for l in labels {
            let k = self.position(l.as_ref())?;
            if order.contains(&k) {
                return Err(Error::DuplicateParty(l.as_ref().to_string()));
            }
            order.push(k);
        }
        Ok(order)
    }

    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Layout> {
        if labels.len() != self.len() {
            return Err(Error::InvalidLayout("relabel length mismatch".into()));
        }
        Layout::new(
            self.parties
                .iter()
                .zip(labels)
                .map(|(p, l)| Party::new(l.as_ref(), p.dim))
                .collect(),
        )
    }
}
