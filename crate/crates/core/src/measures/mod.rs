//! Entanglement quantities and bounds: Holevo χ, average ensemble
//! entanglement, the GHZ/EPR rate split, entanglement of assistance
//! (closed-form bound and optimizer), Wootters formation, min-cut
//! entanglement and the one-way broadcast GHZ bound.

mod eoa;
mod wootters;

pub use eoa::{eoa_optimize, eof_optimize, EoaOptions, EoaReport, FormationReport, OptimizerTrace};
pub use wootters::{concurrence, eof_2qubit, eof_from_concurrence, pure_concurrence};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    binary_entropy, schmidt_at, trace_distance, von_neumann_entropy, PureState,
};
use crate::states::{ensemble_from_helper_basis, hadamard_basis, Ensemble};

/// Mixture-consistency tolerance (trace distance) for supplied ensembles.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// `S(Σ q_j ψ_j^X) − Σ q_j S(ψ_j^X)` for the marginal on `marginal`.
pub fn holevo_chi<S: AsRef<str>>(e: &Ensemble, marginal: &[S]) -> Result<f64> {
    if marginal.is_empty() {
        return Err(Error::InvalidPartition("empty marginal".into()));
    }
    let pos = e.layout().positions_of(marginal)?;
    let full = pos.len() == e.layout().len();
    let avg = e.mixture().partial_trace_at(&pos);
    let mut inner = 0.0;
    if !full {
        for (q, s) in e.entries() {
            inner += q * schmidt_at(s, &pos).entropy();
        }
    }
    Ok(von_neumann_entropy(&avg) - inner)
}

/// `Σ q_j E(ψ_j)` across `left | rest`.
pub fn avg_entanglement<S: AsRef<str>>(e: &Ensemble, left: &[S]) -> Result<f64> {
    let pos = e.layout().positions_of(left)?;
    if pos.is_empty() || pos.len() == e.layout().len() {
        return Err(Error::InvalidPartition("a cut needs parties on both sides".into()));
    }
    Ok(e.entries()
        .iter()
        .map(|(q, s)| q * schmidt_at(s, &pos).entropy())
        .sum())
}

/// GHZ rate `χ = min{S(A),S(B)} − Ē` and EPR rate `Ē` for a helper
/// decomposition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rates {
    pub chi: f64,
    pub e_bar: f64,
}

fn three_party(psi: &PureState, helper: &str) -> Result<(String, String)> {
    let layout = psi.layout();
    if layout.len() != 3 {
        return Err(Error::InvalidPartition(format!(
            "expected three parties, got {}",
            layout.len()
        )));
    }
    layout.position(helper)?;
    let rest: Vec<&str> = layout.labels().into_iter().filter(|l| *l != helper).collect();
    Ok((rest[0].to_string(), rest[1].to_string()))
}

/// Rates for the ensemble `e` on the two non-helper parties of a
/// three-party `psi`. The ensemble must reproduce `tr_helper ψ`.
pub fn ghz_epr_rates(psi: &PureState, helper: &str, e: &Ensemble) -> Result<Rates> {
    let (a, b) = three_party(psi, helper)?;
    let marginal = psi.reduced(&[a.as_str(), b.as_str()])?;
    if e.layout() != marginal.layout() {
        return Err(Error::InvalidLayout(
            "ensemble layout differs from the non-helper parties".into(),
        ));
    }
    let dist = trace_distance(&marginal, &e.mixture())?;
    if dist > CONSISTENCY_TOL {
        return Err(Error::InconsistentEnsemble(dist));
    }
    let upper = eoa_upper_bound(psi, &[a.as_str()], &[b.as_str()])?;
    let e_bar = avg_entanglement(e, &[a.as_str()])?;
    Ok(Rates {
        chi: upper - e_bar,
        e_bar,
    })
}

/// `min{S(ψ^a), S(ψ^b)}` for disjoint party groups `a`, `b`.
pub fn eoa_upper_bound<S: AsRef<str>>(psi: &PureState, a: &[S], b: &[S]) -> Result<f64> {
    let pa = psi.layout().positions_of(a)?;
    let pb = psi.layout().positions_of(b)?;
    if pa.is_empty() || pb.is_empty() || pa.iter().any(|p| pb.contains(p)) {
        return Err(Error::InvalidPartition("a and b must be nonempty and disjoint".into()));
    }
    Ok(group_entropy(psi, &pa).min(group_entropy(psi, &pb)))
}

fn group_entropy(psi: &PureState, pos: &[usize]) -> f64 {
    if pos.len() == psi.layout().len() {
        0.0
    } else {
        schmidt_at(psi, pos).entropy()
    }
}

/// Minimizing cut for the helper parties.
#[derive(Clone, Debug, Serialize)]
pub struct MinCut {
    pub value: f64,
    pub subset: Vec<String>,
}

/// `min_𝒮 S(a ∪ 𝒮)` over all subsets of the helper parties (everything
/// other than `a`, `b`). Ties go to the smallest subset, then the
/// lexicographically smallest label list.
pub fn mincut_entanglement(psi: &PureState, a: &str, b: &str) -> Result<MinCut> {
    let layout = psi.layout();
    if layout.len() < 2 {
        return Err(Error::InvalidPartition("min-cut needs at least two parties".into()));
    }
    let pa = layout.position(a)?;
    let pb = layout.position(b)?;
    if pa == pb {
        return Err(Error::InvalidPartition("a and b must differ".into()));
    }
    let helpers: Vec<usize> = (0..layout.len()).filter(|&p| p != pa && p != pb).collect();
    if helpers.len() > 24 {
        return Err(Error::Unsupported(format!("{} helpers is too many to enumerate", helpers.len())));
    }
    let mut subsets: Vec<Vec<String>> = (0u32..(1 << helpers.len()))
        .map(|mask| {
            let mut s: Vec<String> = helpers
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &p)| layout.parties()[p].label.clone())
                .collect();
            s.sort();
            s
        })
        .collect();
    subsets.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    let mut best: Option<MinCut> = None;
    for s in subsets {
        let mut pos = vec![pa];
        pos.extend(s.iter().map(|l| layout.position(l).expect("helper label")));
        pos.sort_unstable();
        let v = group_entropy(psi, &pos);
        if best.as_ref().is_none_or(|b| v < b.value - 1e-12) {
            best = Some(MinCut { value: v, subset: s });
        }
    }
    Ok(best.expect("at least the empty subset"))
}

/// How `E_F` of the two-party marginal is evaluated.
#[derive(Clone, Debug)]
pub enum FormationProxy {
    /// Exact for two qubits.
    Wootters,
    /// Best (smallest) ensemble found by the helper-isometry optimizer; an
    /// upper value for `E_F`.
    Optimizer(EoaOptions),
}

#[derive(Clone, Debug, Serialize)]
pub struct OneWayBound {
    /// `min{S(a), S(b)} − E_F(ψ^{ab})`.
    pub value: f64,
    pub min_entropy: f64,
    pub formation: f64,
    pub proxy: &'static str,
}

/// One-way broadcast GHZ bound `min{S(a),S(b)} − E_C(ψ^{ab})` with `E_F`
/// standing in for the entanglement cost. Since `E_C ≤ E_F`, the value is
/// a lower value of the bound whenever the two differ.
pub fn oneway_bc_ghz_bound(psi: &PureState, helper: &str, proxy: &FormationProxy) -> Result<OneWayBound> {
    let (a, b) = three_party(psi, helper)?;
    let min_entropy = eoa_upper_bound(psi, &[a.as_str()], &[b.as_str()])?;
    let (formation, name) = match proxy {
        FormationProxy::Wootters => {
            let rho = psi.reduced(&[a.as_str(), b.as_str()])?;
            (eof_2qubit(&rho)?, "wootters")
        }
        FormationProxy::Optimizer(opts) => {
            let r = eof_optimize(psi, &[a.as_str()], &[b.as_str()], &[helper], opts)?;
            (r.value, "optimizer")
        }
    };
    Ok(OneWayBound {
        value: min_entropy - formation,
        min_entropy,
        formation,
        proxy: name,
    })
}

/// A (GHZ rate, EPR rate) pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatePair {
    pub ghz: f64,
    pub epr: f64,
}

/// Rates for the Υ family: the conjectured pair
/// `(H₂(α²), 1 − H₂(α²))` and the two achieved pairs with helper B
/// (computational basis) and helper A (Fourier basis, which attains the
/// formation of `Υ^{BC}`).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct UpsilonRates {
    pub alpha2: f64,
    pub conjectured: RatePair,
    pub helper_b: RatePair,
    pub helper_a: RatePair,
    /// Wootters formation of `Υ^{BC}`.
    pub eof_bc: f64,
}

pub fn upsilon_rates(alpha2: f64) -> Result<UpsilonRates> {
    let u = crate::states::make_upsilon(alpha2)?;
    let h = binary_entropy(alpha2)?;
    let eb = ensemble_from_helper_basis(&u, "B", &crate::qcore::linalg::identity(2))?;
    let rb = ghz_epr_rates(&u, "B", &eb)?;
    let ea = ensemble_from_helper_basis(&u, "A", &hadamard_basis(2))?;
    let ra = ghz_epr_rates(&u, "A", &ea)?;
    Ok(UpsilonRates {
        alpha2,
        conjectured: RatePair { ghz: h, epr: 1.0 - h },
        helper_b: RatePair { ghz: rb.chi, epr: rb.e_bar },
        helper_a: RatePair { ghz: ra.chi, epr: ra.e_bar },
        eof_bc: eof_2qubit(&u.reduced(&["B", "C"])?)?,
    })
}

/// W-state rates with helper C.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WRates {
    /// `H₂(1/3)`.
    pub upper_bound: f64,
    /// Wootters formation of `W^{AB}`.
    pub eof: f64,
    /// `H₂(1/3) − E_F`.
    pub ghz_rate: f64,
    /// GHZ rate after converting the EPR pairs two-for-one:
    /// `H₂(1/3) − E_F/2`.
    pub combined_ghz: f64,
}

pub fn w_rates() -> Result<WRates> {
    let w = crate::states::make_w();
    let upper = eoa_upper_bound(&w, &["A"], &["B"])?;
    let bound = oneway_bc_ghz_bound(&w, "C", &FormationProxy::Wootters)?;
    Ok(WRates {
        upper_bound: upper,
        eof: bound.formation,
        ghz_rate: bound.value,
        combined_ghz: upper - bound.formation / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::identity;
    use crate::qcore::{Layout, Tensor};
    use crate::states::{make_aharonov, make_epr, make_ghz, make_upsilon, make_w};

    #[test]
    fn chi_examples() {
        let g = make_ghz(3, 2).unwrap();
        let e = ensemble_from_helper_basis(&g, "C", &identity(2)).unwrap();
        assert!((holevo_chi(&e, &["A"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(avg_entanglement(&e, &["A"]).unwrap().abs() < 1e-12);
        let same = Ensemble::uniform(vec![make_epr(2).unwrap(); 3]).unwrap();
        assert!(holevo_chi(&same, &["A"]).unwrap().abs() < 1e-12);
        let u = make_upsilon(0.3).unwrap();
        let e = ensemble_from_helper_basis(&u, "A", &identity(2)).unwrap();
        assert!(holevo_chi(&e, &["B"]).unwrap().abs() < 1e-12);
        assert!((avg_entanglement(&e, &["B"]).unwrap() - 1.0).abs() < 1e-12);
        let eh = ensemble_from_helper_basis(&g, "C", &hadamard_basis(2)).unwrap();
        assert!((avg_entanglement(&eh, &["A"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(holevo_chi::<&str>(&e, &[]).is_err());
    }

    #[test]
    fn rates_upsilon_and_w() {
        for k in 0..=10 {
            let a2 = 0.05 * k as f64;
            let r = upsilon_rates(a2).unwrap();
            let h = binary_entropy(a2).unwrap();
            assert!((r.helper_b.ghz - h).abs() < 1e-9 && r.helper_b.epr.abs() < 1e-9);
            let x = binary_entropy((0.5 - (a2 * (1.0 - a2)).sqrt()).max(0.0)).unwrap();
            assert!((r.helper_a.ghz - (1.0 - x)).abs() < 1e-9, "α²={a2}");
            assert!((r.helper_a.epr - x).abs() < 1e-9);
            assert!((r.eof_bc - x).abs() < 1e-6);
        }
        let w = w_rates().unwrap();
        assert!((w.upper_bound - 0.918295834).abs() < 1e-8);
        assert!((w.eof - 0.550048).abs() < 1e-4);
        assert!((w.ghz_rate - 0.36825).abs() < 1e-3);
        assert!((w.combined_ghz - 0.64327).abs() < 1e-3);
    }

    #[test]
    fn w_fourier_ensemble_attains_formation() {
        let w = make_w();
        let e = ensemble_from_helper_basis(&w, "C", &hadamard_basis(2)).unwrap();
        let r = ghz_epr_rates(&w, "C", &e).unwrap();
        let eof = eof_2qubit(&w.reduced(&["A", "B"]).unwrap()).unwrap();
        assert!((r.e_bar - eof).abs() < 1e-9);
        assert!((r.chi + r.e_bar - binary_entropy(1.0 / 3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_ensemble_rejected() {
        let w = make_w();
        let wrong = Ensemble::uniform(vec![make_epr(2).unwrap()]).unwrap();
        assert!(matches!(ghz_epr_rates(&w, "C", &wrong), Err(Error::InconsistentEnsemble(_))));
    }

    #[test]
    fn upper_bounds() {
        let a = make_aharonov();
        assert!((eoa_upper_bound(&a, &["A"], &["B"]).unwrap() - 3f64.log2()).abs() < 1e-12);
        let w = make_w();
        assert!((eoa_upper_bound(&w, &["A"], &["B"]).unwrap() - 0.918295834054).abs() < 1e-10);
        // |0⟩⟨0| ⊗ ρ^B purified
        let zero = crate::states::zero_state(Layout::single("A", 2));
        let bc = make_epr(2).unwrap().relabeled(&["B", "C"]).unwrap();
        let p = zero.tensor(&bc).unwrap();
        assert!(eoa_upper_bound(&p, &["A"], &["B"]).unwrap().abs() < 1e-12);
        assert!(eoa_upper_bound(&p, &["A"], &["A"]).is_err());
    }

    #[test]
    fn mincut_examples() {
        let g = make_ghz(4, 2).unwrap();
        let m = mincut_entanglement(&g, "A", "B").unwrap();
        assert!((m.value - 1.0).abs() < 1e-10);
        assert!(m.subset.is_empty());
        let left = make_epr(2).unwrap().relabeled(&["A", "C1"]).unwrap();
        let right = make_epr(2).unwrap().relabeled(&["C2", "B"]).unwrap();
        let p = left.tensor(&right).unwrap();
        let m = mincut_entanglement(&p, "A", "B").unwrap();
        assert!(m.value.abs() < 1e-10);
        assert_eq!(m.subset, vec!["C1".to_string()]);
        let w = make_w();
        let m = mincut_entanglement(&w, "A", "B").unwrap();
        assert!((m.value - 0.918295834054).abs() < 1e-10);
        let two = make_epr(2).unwrap();
        assert!((mincut_entanglement(&two, "A", "B").unwrap().value - 1.0).abs() < 1e-12);
        assert!(mincut_entanglement(&two, "A", "A").is_err());
    }

    #[test]
    fn oneway_examples() {
        let g = make_ghz(3, 2).unwrap();
        let b = oneway_bc_ghz_bound(&g, "C", &FormationProxy::Wootters).unwrap();
        assert!((b.value - 1.0).abs() < 1e-9);
        let a = make_aharonov();
        assert!(oneway_bc_ghz_bound(&a, "C", &FormationProxy::Wootters).is_err());
        let opts = EoaOptions {
            restarts: 2,
            ..EoaOptions::default()
        };
        let b = oneway_bc_ghz_bound(&a, "C", &FormationProxy::Optimizer(opts)).unwrap();
        // every state in the antisymmetric subspace has E = 1
        assert!((b.formation - 1.0).abs() < 1e-9);
        assert!((b.value - (3f64.log2() - 1.0)).abs() < 1e-9);
    }
}
