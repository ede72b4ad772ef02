//! Coherent version of the helper measurement that leaves GHZ states.
//!
//! After the type step the helper measures the coarse POVM `(c·Θ_𝒥)_𝒥`
//! with `Θ_𝒥 = Σ_α |t_𝒥(α)⟩⟨t_𝒥(α)|`, the projector onto `span 𝒥`. All
//! sequences of one type carry the same weight, so every code is equally
//! likely and the post-measurement state is
//! `ζ = N^{-1/2} Σ_β ψ_{J^β} ⊗ |J^β⟩`. Both sides decode `β` with PGM
//! isometries, the helper relabels `|J^β⟩ ↦ |β⟩`, and controlled copy
//! permutations take every `ψ_{J^β}` to `ψ_{J̄}` for the lexicographically
//! first `J̄` of the type.

use serde::Serialize;

use crate::error::Result;
use crate::qcore::linalg::{psd_sqrt, CMatrix, CVector, C64};
use crate::qcore::random::ProtocolRng;
use crate::qcore::{entanglement_entropy, PureState};

use super::pgm::pgm_operators;
use super::protocol::{
    check_groups, check_memory, code_size, mean_std, run_trials, sample_index, Completion, Measurement,
    Outcome, ProtocolOptions,
};
use super::source::{copy_permutation, sorting_permutation, Source};
use super::types::Code;

#[derive(Clone, Debug, Serialize)]
pub struct GhzRecord {
    pub trial: usize,
    pub type_counts: Vec<usize>,
    pub type_probability: f64,
    pub code: Vec<Vec<usize>>,
    pub code_size: usize,
    pub outcome: Outcome,
    /// `|⟨Z_target|Z_out⟩|²` where the output keeps the decoders' fail
    /// flag as a separate value.
    pub fidelity: Option<f64>,
    /// PGM success probabilities on the `a` and `b` sides.
    pub decoder_success: Option<(f64, f64)>,
    /// `log₂ N`.
    pub ghz_bits: f64,
    /// `E(ψ_{J̄})` across `a | b`.
    pub epr_bits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GhzReport {
    pub protocol: String,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Mean of `log₂N / n`, aborted trials counting as zero.
    pub mean_rate: f64,
    pub std: f64,
    /// `χ = min{χ_a, χ_b}` of the helper ensemble.
    pub upper_bound: f64,
    pub abort_rate: f64,
    pub per_trial: Vec<GhzRecord>,
    pub eta: f64,
    pub completion: Completion,
    pub e_bar: f64,
    /// Mean fidelity over completed trials.
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    /// Mean `E(ψ_{J̄}) / n`, aborted trials counting as zero.
    pub mean_epr_rate: f64,
}

/// Row-major `d_a^n × d_b^n` coefficient matrix of a party-major vector
/// whose `a` registers come first.
fn as_matrix(v: &CVector, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, db, |i, j| v[i * db + j])
}

/// Decoding data for one code.
pub(crate) struct Decoders {
    /// `√D_β` for `β < N` on each side; the fail element is dropped since
    /// its flag never matches the target.
    pub roots_a: Vec<CMatrix>,
    pub roots_b: Vec<CMatrix>,
    pub success: (f64, f64),
}

pub(crate) fn decoders(states: &[CMatrix]) -> Result<Decoders> {
    let mut roots_a = Vec::with_capacity(states.len());
    let mut roots_b = Vec::with_capacity(states.len());
    let rho_a: Vec<CMatrix> = states.iter().map(|x| x * x.adjoint()).collect();
    let rho_b: Vec<CMatrix> = states.iter().map(|x| x.transpose() * x.conjugate()).collect();
    let pa = pgm_operators(&rho_a)?;
    let pb = pgm_operators(&rho_b)?;
    for beta in 0..states.len() {
        roots_a.push(psd_sqrt(&pa.elements[beta]));
        roots_b.push(psd_sqrt(&pb.elements[beta]));
    }
    Ok(Decoders {
        roots_a,
        roots_b,
        success: (pa.success_probability, pb.success_probability),
    })
}

/// `⟨X_J̄| (P^a_β √D^a_β ⊗ P^b_β √D^b_β) |X_β⟩` summed over `β` and divided
/// by `N`, squared.
pub(crate) fn coherent_fidelity(
    states: &[CMatrix],
    target: &CMatrix,
    dec: &Decoders,
    maps_a: &[Vec<usize>],
    maps_b: &[Vec<usize>],
) -> f64 {
    let n = states.len();
    let mut acc = C64::new(0.0, 0.0);
    for beta in 0..n {
        let y = &dec.roots_a[beta] * &states[beta] * dec.roots_b[beta].transpose();
        let (ma, mb) = (&maps_a[beta], &maps_b[beta]);
        for i in 0..y.nrows() {
            for j in 0..y.ncols() {
                acc += target[(i, j)].conj() * y[(ma[i], mb[j])];
            }
        }
    }
    (acc / n as f64).norm_sqr()
}

struct Setup<'a> {
    m: Measurement<'a>,
    dims_a: Vec<usize>,
    dims_b: Vec<usize>,
    da: usize,
    db: usize,
    left: Vec<String>,
}

impl Setup<'_> {
    fn run(&self, trial: usize, rng: &mut ProtocolRng) -> Result<GhzRecord> {
        let opts = self.m.opts;
        let n = opts.n;
        let (t, tp, typical) = self.m.sample_type(rng);
        let mut rec = GhzRecord {
            trial,
            type_counts: t.counts().to_vec(),
            type_probability: tp,
            code: vec![],
            code_size: 0,
            outcome: Outcome::Atypical,
            fidelity: None,
            decoder_success: None,
            ghz_bits: 0.0,
            epr_bits: 0.0,
        };
        if !typical {
            return Ok(rec);
        }
        let size = code_size(n, self.m.chi, opts.delta, t.size());
        let code = Code::random(&t, size, opts.sequence_cap, rng)?;
        rec.code = code.members().to_vec();
        rec.code_size = size;
        if opts.completion == Completion::AbortOnComplement {
            // span 𝒥 holds N of the M equally weighted sequences
            let inside = size as f64 / t.size() as f64;
            if sample_index(&[inside, 1.0 - inside], rng) == 1 {
                rec.outcome = Outcome::Complement;
                return Ok(rec);
            }
        }
        let (fid, success) = self.decode(&code)?;
        let first = t.first();
        let bar = self.m.copies.product(self.m.src, &first);
        let s = PureState::from_unnormalized(self.m.copies.layout().clone(), bar)?;
        rec.epr_bits = entanglement_entropy(&s, &self.left)?;
        rec.ghz_bits = (size as f64).log2();
        rec.fidelity = Some(fid);
        rec.decoder_success = Some(success);
        rec.outcome = Outcome::Success;
        Ok(rec)
    }

    fn decode(&self, code: &Code) -> Result<(f64, (f64, f64))> {
        let n = self.m.opts.n;
        let states: Vec<CMatrix> = code
            .members()
            .iter()
            .map(|s| {
                let v = self.m.copies.product(self.m.src, s);
                let norm = v.norm();
                as_matrix(&(v / C64::new(norm, 0.0)), self.da, self.db)
            })
            .collect();
        let first = code.parent().first();
        let v = self.m.copies.product(self.m.src, &first);
        let target = as_matrix(&(&v / C64::new(v.norm(), 0.0)), self.da, self.db);
        let dec = decoders(&states)?;
        let mut maps_a = Vec::with_capacity(states.len());
        let mut maps_b = Vec::with_capacity(states.len());
        for s in code.members() {
            let sigma = sorting_permutation(s, &first);
            maps_a.push(copy_permutation(&self.dims_a, n, &sigma));
            maps_b.push(copy_permutation(&self.dims_b, n, &sigma));
        }
        let f = coherent_fidelity(&states, &target, &dec, &maps_a, &maps_b);
        Ok((f, dec.success))
    }
}

/// GHZ extraction between `a`, `b` and `helper` at finite `n`.
pub fn run_ghz_protocol<S: AsRef<str>>(
    psi: &PureState,
    a: &[S],
    b: &[S],
    helper: &[S],
    opts: &ProtocolOptions,
) -> Result<GhzReport> {
    let order: Vec<&str> = a
        .iter()
        .chain(b)
        .chain(helper)
        .map(|s| s.as_ref())
        .collect();
    let psi = psi.permuted(&order)?;
    let src = Source::new(&psi, helper, opts.helper_basis.as_ref())?;
    check_groups(&src, a, b)?;
    let chi = src.chi(a)?.min(src.chi(b)?);
    let e_bar = crate::measures::avg_entanglement(&src.ensemble()?, a)?;
    let rest = src.rest_layout();
    let dims_a: Vec<usize> = a.iter().map(|l| rest.party(l.as_ref()).map(|p| p.dim)).collect::<Result<_>>()?;
    let dims_b: Vec<usize> = b.iter().map(|l| rest.party(l.as_ref()).map(|p| p.dim)).collect::<Result<_>>()?;
    let da = dims_a.iter().product::<usize>().pow(opts.n as u32);
    let db = dims_b.iter().product::<usize>().pow(opts.n as u32);
    let m = Measurement::new(&src, chi, opts)?;
    let max_n = m
        .types
        .iter()
        .map(|t| code_size(opts.n, chi, opts.delta, t.0.size()))
        .max()
        .unwrap_or(1) as f64;
    check_memory(16.0 * ((da * da + db * db) as f64) * (3.0 * max_n + 4.0), opts.mem_cap_mb)?;
    let left = m.copies.labels(a);
    let setup = Setup {
        m,
        dims_a,
        dims_b,
        da,
        db,
        left,
    };
    let records = run_trials(opts.trials, opts.seed, opts.parallel, |t, rng| setup.run(t, rng))?;
    let n = opts.n as f64;
    let rates: Vec<f64> = records.iter().map(|r| r.ghz_bits / n).collect();
    let (mean, std) = mean_std(&rates);
    let fids: Vec<f64> = records.iter().filter_map(|r| r.fidelity).collect();
    let epr: Vec<f64> = records.iter().map(|r| r.epr_bits / n).collect();
    let aborted = records.iter().filter(|r| r.outcome != Outcome::Success).count();
    Ok(GhzReport {
        protocol: "ghz".into(),
        n: opts.n,
        delta: opts.delta,
        trials: opts.trials,
        seed: opts.seed,
        mean_rate: mean,
        std,
        upper_bound: chi,
        abort_rate: aborted as f64 / opts.trials.max(1) as f64,
        per_trial: records,
        eta: opts.eta,
        completion: opts.completion,
        e_bar,
        mean_fidelity: mean_std(&fids).0,
        min_fidelity: fids.iter().copied().fold(f64::INFINITY, f64::min).min(1.0),
        mean_epr_rate: mean_std(&epr).0,
    })
}
