//! Four-party step: the fourth party measures a rank-one Fourier code
//! built from codewords drawn from `q^{⊗n}` and leaves a tripartite state
//! whose `b | ac` and `a | bc` entanglement should both stay near
//! `n·min-cut`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{holevo_chi, mincut_entanglement};
use crate::qcore::linalg::{kron, trace_norm, CMatrix, CVector};
use crate::qcore::random::ProtocolRng;
use crate::qcore::{entanglement_entropy, PureState};

use super::protocol::{
    check_memory, mean_std, projected_vectors, run_eoa_protocol, run_trials, sample_index, ProtocolOptions,
};
use super::source::{Copies, Source};

#[derive(Clone, Debug, Serialize)]
pub struct FourRecord {
    pub trial: usize,
    pub code: Vec<Vec<usize>>,
    pub code_size: usize,
    /// `Σ_β q(J^β)`, the probability of landing in the code span.
    pub code_weight: f64,
    pub alpha: usize,
    /// Probability of `α` given the code, post-selected on its span.
    pub alpha_probability: f64,
    pub entropy_b_ac: f64,
    pub entropy_a_bc: f64,
    /// `‖ϑ^a − (ψ^a)^{⊗n}‖₁`.
    pub marginal_distance: f64,
    /// `‖(1/N) Σ_β ψ^a_{J^β} − (ψ^a)^{⊗n}‖₁` for the drawn code.
    pub code_average_distance: f64,
    /// Rate of the chained EPR run on `ϑ`, when requested.
    pub chained_rate: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FourReport {
    pub protocol: String,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Mean of `min{E(b|ac), E(a|bc)} / n`.
    pub mean_rate: f64,
    pub std: f64,
    /// Min-cut entanglement of the single-copy state.
    pub upper_bound: f64,
    /// Mean probability of the complement of the code span.
    pub abort_rate: f64,
    pub per_trial: Vec<FourRecord>,
    pub chi_a: f64,
    pub chi_b: f64,
    pub chi_ac: f64,
    pub chi_bc: f64,
    /// `min{χ_b, χ_ac}`.
    pub chi0: f64,
    pub code_size: usize,
    pub mean_entropy_b_ac: f64,
    pub mean_entropy_a_bc: f64,
    pub mean_marginal_distance: f64,
    pub mean_code_average_distance: f64,
}

/// `N = max(1, ⌊2^{n(χ₀ − δ)}⌋)`, capped at `support`.
pub fn four_party_code_size(n: usize, chi0: f64, delta: f64, support: usize) -> usize {
    let raw = (n as f64 * (chi0 - delta)).exp2().floor();
    let raw = if raw.is_finite() && raw >= 1.0 { raw } else { 1.0 };
    (raw.min(support as f64)) as usize
}

/// All sequences with positive probability, with their probabilities.
fn support(q: &[f64], n: usize, cap: u128) -> Result<Vec<(Vec<usize>, f64)>> {
    let letters: Vec<usize> = (0..q.len()).filter(|&j| q[j] > 0.0).collect();
    let size = (letters.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::SizeCap {
            what: "number of codeword candidates".into(),
            size,
            cap,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut digits = vec![0usize; n];
    loop {
        let seq: Vec<usize> = digits.iter().map(|&d| letters[d]).collect();
        let p = seq.iter().map(|&j| q[j]).product();
        out.push((seq, p));
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < letters.len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// `N` distinct codewords drawn from `q^{⊗n}` one after the other.
fn draw_code(pool: &[(Vec<usize>, f64)], size: usize, rng: &mut ProtocolRng) -> Vec<Vec<usize>> {
    let mut w: Vec<f64> = pool.iter().map(|p| p.1).collect();
    let mut code = Vec::with_capacity(size);
    for _ in 0..size {
        let k = sample_index(&w, rng);
        code.push(pool[k].0.clone());
        w[k] = 0.0;
    }
    code
}

/// Party-major `a`-marginal of `n` copies: `⊗_k ρ_{J_k}`.
fn product_marginal(letters: &[CMatrix], seq: &[usize]) -> CMatrix {
    let mut m = letters[seq[0]].clone();
    for &j in &seq[1..] {
        m = kron(&m, &letters[j]);
    }
    m
}

/// Options for [`disengage_fourth`].
#[derive(Clone, Debug, Default)]
pub struct FourOptions {
    pub protocol: ProtocolOptions,
    /// Run the EPR protocol on every `ϑ` with these options, using the `c`
    /// copies as helper.
    pub chain: Option<ProtocolOptions>,
}

/// Measure `d_helper` on `n` copies and report on the remaining
/// `a, b, c_keep` state.
pub fn disengage_fourth(
    psi: &PureState,
    a: &str,
    b: &str,
    c_keep: &str,
    d_helper: &str,
    opts: &FourOptions,
) -> Result<FourReport> {
    let po = &opts.protocol;
    if po.n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    if psi.layout().len() != 4 {
        return Err(Error::InvalidPartition("the four-party step needs exactly four parties".into()));
    }
    let order = [a, b, c_keep, d_helper];
    let (a, b, c_keep, d_helper) = ([a], [b], [c_keep], [d_helper]);
    let psi = psi.permuted(&order)?;
    let src = Source::new(&psi, &d_helper, po.helper_basis.as_ref())?;
    let ens = src.ensemble()?;
    let ac = [a[0], c_keep[0]];
    let bc = [b[0], c_keep[0]];
    let chi_a = holevo_chi(&ens, &a)?;
    let chi_b = holevo_chi(&ens, &b)?;
    let chi_ac = holevo_chi(&ens, &ac)?;
    let chi_bc = holevo_chi(&ens, &bc)?;
    let chi0 = chi_b.min(chi_ac);
    let upper = mincut_entanglement(&psi, a[0], b[0])?.value;

    let rest_dim = src.rest_layout().dim() as f64;
    let q = src.probabilities();
    let pool = support(q, po.n, po.sequence_cap)?;
    let size = four_party_code_size(po.n, chi0, po.delta, pool.len());
    check_memory(16.0 * rest_dim.powi(po.n as i32) * (2.0 * size as f64 + 4.0), po.mem_cap_mb)?;
    let copies = Copies::new(src.rest_layout(), po.n)?;
    let a_labels = copies.labels(&a);
    let b_labels = copies.labels(&b);
    let c_labels = copies.labels(&c_keep);

    // single-copy a-marginals of the conditional states and of ψ
    let a_pos = src.rest_layout().positions_of(&a)?;
    let letters: Vec<CMatrix> = (0..src.alphabet())
        .map(|j| {
            let v = src.vector(j);
            if q[j] <= 0.0 {
                return Ok(CMatrix::zeros(1, 1));
            }
            let s = PureState::from_unnormalized(src.rest_layout().clone(), v.clone())?;
            Ok(s.density().partial_trace_at(&a_pos).matrix().clone())
        })
        .collect::<Result<_>>()?;
    let rho_a = psi.reduced(&a)?.matrix().clone();
    let mut target = rho_a.clone();
    for _ in 1..po.n {
        target = kron(&target, &rho_a);
    }

    let run = |trial: usize, rng: &mut ProtocolRng| -> Result<FourRecord> {
        let code = draw_code(&pool, size, rng);
        let products: Vec<CVector> = code.iter().map(|s| copies.product(&src, s)).collect();
        let code_weight: f64 = products.iter().map(|p| p.norm_squared()).sum();
        let projected = projected_vectors(&products);
        let weights: Vec<f64> = projected.iter().map(|v| v.norm_squared()).collect();
        let alpha = sample_index(&weights, rng);
        let theta = PureState::from_unnormalized(copies.layout().clone(), projected[alpha].clone())?;
        let entropy_b_ac = entanglement_entropy(&theta, &b_labels)?;
        let entropy_a_bc = entanglement_entropy(&theta, &a_labels)?;
        let theta_a = theta.reduced(&a_labels)?;
        let marginal_distance = trace_norm(&(theta_a.matrix() - &target));
        let mut avg = CMatrix::zeros(target.nrows(), target.ncols());
        for s in &code {
            avg += product_marginal(&letters, s);
        }
        avg /= crate::qcore::linalg::real(code.len() as f64);
        let code_average_distance = trace_norm(&(avg - &target));
        let chained_rate = match &opts.chain {
            None => None,
            Some(co) => Some(run_eoa_protocol(&theta, &a_labels, &b_labels, &c_labels, co)?.mean_rate),
        };
        Ok(FourRecord {
            trial,
            code,
            code_size: size,
            code_weight,
            alpha,
            alpha_probability: weights[alpha] / code_weight,
            entropy_b_ac,
            entropy_a_bc,
            marginal_distance,
            code_average_distance,
            chained_rate,
        })
    };
    let records = run_trials(po.trials, po.seed, po.parallel, run)?;
    let n = po.n as f64;
    let rates: Vec<f64> = records
        .iter()
        .map(|r| r.entropy_b_ac.min(r.entropy_a_bc) / n)
        .collect();
    let (mean, std) = mean_std(&rates);
    let mean_of = |f: &dyn Fn(&FourRecord) -> f64| mean_std(&records.iter().map(f).collect::<Vec<_>>()).0;
    Ok(FourReport {
        protocol: "four-party".into(),
        n: po.n,
        delta: po.delta,
        trials: po.trials,
        seed: po.seed,
        mean_rate: mean,
        std,
        upper_bound: upper,
        abort_rate: mean_of(&|r| 1.0 - r.code_weight),
        chi_a,
        chi_b,
        chi_ac,
        chi_bc,
        chi0,
        code_size: size,
        mean_entropy_b_ac: mean_of(&|r| r.entropy_b_ac),
        mean_entropy_a_bc: mean_of(&|r| r.entropy_a_bc),
        mean_marginal_distance: mean_of(&|r| r.marginal_distance),
        mean_code_average_distance: mean_of(&|r| r.code_average_distance),
        per_trial: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Layout, Tensor};
    use crate::states::{hadamard_basis, make_epr, make_ghz, zero_state};

    fn opts(n: usize, trials: usize) -> FourOptions {
        FourOptions {
            protocol: ProtocolOptions {
                n,
                trials,
                seed: 4,
                ..Default::default()
            },
            chain: None,
        }
    }

    #[test]
    fn ghz4_fourier_measurement_leaves_ghz3() {
        let g = make_ghz(4, 2).unwrap();
        let mut o = opts(1, 10);
        o.protocol.helper_basis = Some(hadamard_basis(2));
        let r = disengage_fourth(&g, "A", "B", "C", "D", &o).unwrap();
        assert!((r.upper_bound - 1.0).abs() < 1e-10);
        assert_eq!(r.code_size, 1);
        for t in &r.per_trial {
            assert!((t.entropy_a_bc - 1.0).abs() < 1e-10);
            assert!((t.entropy_b_ac - 1.0).abs() < 1e-10);
            assert!(t.marginal_distance < 1e-10);
        }
        assert!((r.mean_rate - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vacuous_on_product_helpers() {
        let l = Layout::from_pairs(&[("C", 2), ("D", 2)]).unwrap();
        let s = make_epr(2).unwrap().tensor(&zero_state(l)).unwrap();
        let r = disengage_fourth(&s, "A", "B", "C", "D", &opts(3, 5)).unwrap();
        assert_eq!(r.code_size, 1);
        assert!(r.abort_rate.abs() < 1e-12);
        for t in &r.per_trial {
            assert!((t.entropy_a_bc - 3.0).abs() < 1e-10);
            assert!(t.marginal_distance < 1e-10);
        }
    }

    #[test]
    fn support_enumeration() {
        let s = support(&[0.5, 0.0, 0.5], 2, 100).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[1].0, vec![0, 2]);
        assert!(support(&[0.5, 0.5], 10, 100).is_err());
        assert_eq!(four_party_code_size(4, 1.0, 0.1, 16), 12);
        assert_eq!(four_party_code_size(4, 1.0, 0.1, 5), 5);
    }

    #[test]
    fn deterministic_and_chained() {
        let g = make_ghz(4, 2).unwrap();
        let mut o = opts(2, 4);
        o.chain = Some(ProtocolOptions {
            n: 1,
            trials: 2,
            eta: 2.0,
            ..Default::default()
        });
        let x = disengage_fourth(&g, "A", "B", "C", "D", &o).unwrap();
        o.protocol.parallel = false;
        let y = disengage_fourth(&g, "A", "B", "C", "D", &o).unwrap();
        assert_eq!(
            serde_json::to_string(&x).unwrap(),
            serde_json::to_string(&y).unwrap()
        );
        assert!(x.per_trial.iter().all(|t| t.chained_rate.is_some()));
    }
}
