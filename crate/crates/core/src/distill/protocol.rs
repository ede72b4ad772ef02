//! The helper's two-step measurement and the EPR distillation run.
//!
//! Step one projects the helper's `n` copies onto a type class `Π(P)`;
//! atypical types (`‖P − q‖₁ > η`) abort. Step two measures the rank-one
//! Fourier code states. The full POVM `(c/N)|t_𝒥(α)⟩⟨t_𝒥(α)|` over all
//! `N`-subsets `𝒥` of the type class is executed exactly by drawing `𝒥`
//! uniformly and then `α` by the Born rule inside `span 𝒥`: every sequence
//! of one type carries the same weight, so each code is equally likely.
//! [`Completion::AbortOnComplement`] instead measures one sampled code
//! completed by the complement of its span, which aborts.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{real, CVector};
use crate::qcore::random::{trial_rng, ProtocolRng};
use crate::qcore::{entanglement_entropy, CMatrix, PureState};
use rand::Rng;

use super::source::{Copies, Source};
use super::types::{enumerate_types, fourier_phase, Code, TypeClass, DEFAULT_SEQUENCE_CAP};

/// How the sampled-code measurement is completed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Completion {
    /// Exact execution of the full POVM over all codes (no complement).
    FullPovm,
    /// One sampled code plus the complement of its span as an abort
    /// outcome.
    AbortOnComplement,
}

#[derive(Clone, Debug)]
pub struct ProtocolOptions {
    pub n: usize,
    pub delta: f64,
    /// Typicality window on `‖P − q‖₁`.
    pub eta: f64,
    pub trials: usize,
    pub seed: u64,
    pub completion: Completion,
    /// Helper measurement basis (columns); computational when `None`.
    pub helper_basis: Option<CMatrix>,
    pub mem_cap_mb: u64,
    pub sequence_cap: u128,
    pub parallel: bool,
    /// Also average every trial exactly over types and `α`, drawing one
    /// code per type. Same expectation, much smaller spread at small `n`.
    pub stratify: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            n: 4,
            delta: 0.1,
            eta: 0.2,
            trials: 100,
            seed: 0,
            completion: Completion::FullPovm,
            helper_basis: None,
            mem_cap_mb: 2048,
            sequence_cap: DEFAULT_SEQUENCE_CAP,
            parallel: true,
            stratify: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    /// Type outside the typicality window.
    Atypical,
    /// Complement of the code span.
    Complement,
}

/// One run of the helper measurement.
#[derive(Clone, Debug, Serialize)]
pub struct OutcomeRecord {
    pub trial: usize,
    pub type_counts: Vec<usize>,
    pub type_probability: f64,
    pub code: Vec<Vec<usize>>,
    pub code_size: usize,
    pub alpha: Option<usize>,
    /// Probability of `α` given the type and code.
    pub alpha_probability: f64,
    pub outcome: Outcome,
    /// Entanglement of `ϑ` across the reported cut(s), in bits.
    pub entropies: Vec<CutEntropy>,
    /// `Σ p·E(ϑ)` over the measurement completed by the sampled code
    /// (computational basis outside its span).
    pub completed_average: f64,
    /// `Σ_P p(P) Σ_α p(α | P) E(ϑ_α)` when stratification is on.
    pub stratified: Option<f64>,
    #[serde(skip)]
    pub state: Option<PureState>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutEntropy {
    pub cut: String,
    pub bits: f64,
}

/// `N = max(1, ⌊2^{n(χ − 2δ)}⌋)`, capped at `m`.
pub fn code_size(n: usize, chi: f64, delta: f64, m: u128) -> usize {
    let raw = (n as f64 * (chi - 2.0 * delta)).exp2().floor();
    let raw = if raw.is_finite() && raw >= 1.0 { raw } else { 1.0 };
    (raw.min(m as f64).min(usize::MAX as f64)) as usize
}

pub(crate) fn check_memory(bytes: f64, cap_mb: u64) -> Result<()> {
    let mb = (bytes / (1024.0 * 1024.0)).ceil() as u64;
    if mb > cap_mb {
        return Err(Error::ResourceCap { needed_mb: mb, cap_mb });
    }
    Ok(())
}

/// `(1/√N) Σ_β e^{−2πiαβ/N} v_{J^(β)}` for every `α`.
pub(crate) fn projected_vectors(products: &[CVector]) -> Vec<CVector> {
    let n = products.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|alpha| {
            let mut v = CVector::zeros(products[0].len());
            for (beta, p) in products.iter().enumerate() {
                v.axpy(fourier_phase(alpha, beta, n).conj() * s, p, real(1.0));
            }
            v
        })
        .collect()
}

pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Types with their Born probabilities under `q^{⊗n}`.
pub(crate) fn type_distribution(src: &Source, n: usize, cap: u128) -> Result<Vec<(TypeClass, f64)>> {
    let types = enumerate_types(n, src.alphabet(), cap)?;
    let q = src.probabilities();
    Ok(types
        .into_iter()
        .map(|t| {
            let p = t.ln_probability(q).exp();
            (t, p)
        })
        .collect())
}

/// The cut a protocol reports on.
#[derive(Clone, Debug)]
pub(crate) struct Cut {
    pub name: String,
    /// Labels of the left side among the `n`-copy registers.
    pub left: Vec<String>,
    /// Single-copy entropies `E(ψ_j)` of the conditional states.
    pub letter_entropies: Vec<f64>,
}

impl Cut {
    pub fn new<S: AsRef<str>>(src: &Source, copies: &Copies, left: &[S], right: &[S]) -> Result<Self> {
        let name = format!(
            "{}|{}",
            left.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(""),
            right.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join("")
        );
        Ok(Cut {
            name,
            left: copies.labels(left),
            letter_entropies: src.conditional_entropies(left)?,
        })
    }
}

/// Shared per-run setup of the two-step measurement.
pub(crate) struct Measurement<'a> {
    pub src: &'a Source,
    pub copies: Copies,
    pub types: Vec<(TypeClass, f64)>,
    pub chi: f64,
    pub opts: &'a ProtocolOptions,
}

impl<'a> Measurement<'a> {
    pub fn new(src: &'a Source, chi: f64, opts: &'a ProtocolOptions) -> Result<Self> {
        if opts.n == 0 {
            return Err(Error::OutOfRange("n must be at least 1".into()));
        }
        let rest_dim = src.rest_layout().dim() as f64;
        let vec_bytes = 16.0 * rest_dim.powi(opts.n as i32);
        let types = type_distribution(src, opts.n, opts.sequence_cap)?;
        let max_m = types.iter().map(|t| t.0.size()).max().unwrap_or(1);
        let max_n = code_size(opts.n, chi, opts.delta, max_m) as f64;
        check_memory(vec_bytes * (2.0 * max_n + 4.0), opts.mem_cap_mb)?;
        let copies = Copies::new(src.rest_layout(), opts.n)?;
        Ok(Measurement {
            src,
            copies,
            types,
            chi,
            opts,
        })
    }

    /// Draw the type; `None` code when atypical.
    pub fn sample_type(&self, rng: &mut ProtocolRng) -> (TypeClass, f64, bool) {
        let w: Vec<f64> = self.types.iter().map(|t| t.1).collect();
        let k = sample_index(&w, rng);
        let (t, p) = &self.types[k];
        let typical = t.l1_distance(self.src.probabilities()) <= self.opts.eta + 1e-12;
        (t.clone(), *p, typical)
    }

    fn entropy(&self, v: &CVector, cut: &Cut) -> Result<f64> {
        let s = PureState::from_unnormalized(self.copies.layout().clone(), v.clone())?;
        entanglement_entropy(&s, &cut.left)
    }

    /// Expected `E(ϑ)` in bits with one random code per type; atypical
    /// types and aborted outcomes count as zero.
    pub fn stratified(&self, cut: &Cut, rng: &mut ProtocolRng) -> Result<f64> {
        let q = self.src.probabilities();
        let mut total = 0.0;
        for (t, tp) in &self.types {
            if *tp <= 0.0 || t.l1_distance(q) > self.opts.eta + 1e-12 {
                continue;
            }
            let size = code_size(self.opts.n, self.chi, self.opts.delta, t.size());
            let code = Code::random(t, size, self.opts.sequence_cap, rng)?;
            let products: Vec<CVector> = code.members().iter().map(|s| self.copies.product(self.src, s)).collect();
            let projected = projected_vectors(&products);
            let weights: Vec<f64> = projected.iter().map(|v| v.norm_squared()).collect();
            let norm = match self.opts.completion {
                Completion::FullPovm => weights.iter().sum(),
                Completion::AbortOnComplement => *tp,
            };
            if norm <= 0.0 {
                continue;
            }
            for (v, &w) in projected.iter().zip(&weights) {
                if w > 0.0 {
                    total += tp * w / norm * self.entropy(v, cut)?;
                }
            }
        }
        Ok(total)
    }

    /// One full helper measurement: type, code, `α`.
    pub fn run(&self, trial: usize, cuts: &[Cut], rng: &mut ProtocolRng) -> Result<OutcomeRecord> {
        let n = self.opts.n;
        let (t, tp, typical) = self.sample_type(rng);
        let base_average: Vec<f64> = cuts
            .iter()
            .map(|c| {
                n as f64
                    * c.letter_entropies
                        .iter()
                        .zip(self.src.probabilities())
                        .map(|(e, q)| e * q)
                        .sum::<f64>()
            })
            .collect();
        let mut rec = OutcomeRecord {
            trial,
            type_counts: t.counts().to_vec(),
            type_probability: tp,
            code: vec![],
            code_size: 0,
            alpha: None,
            alpha_probability: 0.0,
            outcome: Outcome::Atypical,
            entropies: vec![],
            completed_average: base_average[0],
            stratified: None,
            state: None,
        };
        if !typical {
            return Ok(rec);
        }
        let size = code_size(n, self.chi, self.opts.delta, t.size());
        let code = Code::random(&t, size, self.opts.sequence_cap, rng)?;
        let products: Vec<CVector> = code.members().iter().map(|s| self.copies.product(self.src, s)).collect();
        let projected = projected_vectors(&products);
        let weights: Vec<f64> = projected.iter().map(|v| v.norm_squared()).collect();
        let span: f64 = weights.iter().sum();
        rec.code = code.members().to_vec();
        rec.code_size = size;

        let entropy_of = |v: &CVector, cut: &Cut| self.entropy(v, cut);
        // exact average of the completed measurement on the first cut
        let cut0 = &cuts[0];
        let mut completed = base_average[0];
        for (s, p) in code.members().iter().zip(&products) {
            let e: f64 = s.iter().map(|&j| cut0.letter_entropies[j]).sum();
            completed -= p.norm_squared() * e;
        }
        for (v, &w) in projected.iter().zip(&weights) {
            if w > 0.0 {
                completed += w * entropy_of(v, cut0)?;
            }
        }
        rec.completed_average = completed;

        let alpha = match self.opts.completion {
            Completion::FullPovm => sample_index(&weights, rng),
            Completion::AbortOnComplement => {
                // conditional on the type: p(α) = ‖φ_α‖² / ‖Π(P)ψ‖², ‖Π(P)ψ‖² = M·w
                let type_weight = tp;
                let mut w = weights.clone();
                w.push((type_weight - span).max(0.0));
                let k = sample_index(&w, rng);
                if k == size {
                    rec.outcome = Outcome::Complement;
                    rec.alpha_probability = w[k] / type_weight;
                    return Ok(rec);
                }
                k
            }
        };
        rec.alpha = Some(alpha);
        rec.alpha_probability = match self.opts.completion {
            Completion::FullPovm => weights[alpha] / span,
            Completion::AbortOnComplement => weights[alpha] / tp,
        };
        rec.outcome = Outcome::Success;
        let v = &projected[alpha];
        for cut in cuts {
            rec.entropies.push(CutEntropy {
                cut: cut.name.clone(),
                bits: entropy_of(v, cut)?,
            });
        }
        rec.state = Some(PureState::from_unnormalized(self.copies.layout().clone(), v.clone())?);
        Ok(rec)
    }
}

/// Run `trials` independent helper measurements with per-trial seed
/// streams; results are ordered by trial index.
pub(crate) fn run_trials<T: Send>(
    trials: usize,
    seed: u64,
    parallel: bool,
    f: impl Fn(usize, &mut ProtocolRng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let one = |t: usize| {
        let mut rng = trial_rng(seed, t as u64);
        f(t, &mut rng)
    };
    if parallel {
        (0..trials).into_par_iter().map(one).collect()
    } else {
        (0..trials).map(one).collect()
    }
}

/// Helper's two-step measurement on `n` copies of `psi`. The reported cut
/// is `a | b` on the non-helper parties.
pub fn helper_measure<S: AsRef<str>>(
    psi: &PureState,
    a: &[S],
    b: &[S],
    helper: &[S],
    opts: &ProtocolOptions,
    rng: &mut ProtocolRng,
) -> Result<OutcomeRecord> {
    let src = Source::new(psi, helper, opts.helper_basis.as_ref())?;
    check_groups(&src, a, b)?;
    let chi = src.chi(a)?.min(src.chi(b)?);
    let m = Measurement::new(&src, chi, opts)?;
    let cut = Cut::new(&src, &m.copies, a, b)?;
    m.run(0, &[cut], rng)
}

pub(crate) fn check_groups<S: AsRef<str>>(src: &Source, a: &[S], b: &[S]) -> Result<()> {
    let l = src.rest_layout();
    let pa = l.positions_of(a)?;
    let pb = l.positions_of(b)?;
    if pa.is_empty() || pb.is_empty() || pa.len() + pb.len() != l.len() || pa.iter().any(|p| pb.contains(p)) {
        return Err(Error::InvalidPartition(
            "a and b must split the non-helper parties".into(),
        ));
    }
    Ok(())
}

/// Summary of a distillation run.
#[derive(Clone, Debug, Serialize)]
pub struct DistillReport {
    pub protocol: String,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Mean of `E(ϑ)/n`, aborted trials counting as zero.
    pub mean_rate: f64,
    pub std: f64,
    /// `min{S(a), S(b)}`.
    pub upper_bound: f64,
    pub abort_rate: f64,
    pub per_trial: Vec<OutcomeRecord>,
    pub eta: f64,
    pub completion: Completion,
    pub chi: f64,
    pub e_bar: f64,
    /// Mean `log₂N / n` over non-aborted trials.
    pub mean_code_rate: f64,
    /// `Ē + mean_code_rate`.
    pub ensemble_rate: f64,
    /// Largest per-trial completed-measurement average, in bits.
    pub max_completed_average: f64,
    /// `max_completed_average ≤ n·upper_bound + 1e-9`.
    pub bound_holds: bool,
    /// Mean and spread of the stratified per-trial `E/n`, when enabled.
    pub stratified_rate: Option<f64>,
    pub stratified_std: Option<f64>,
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v.sqrt())
}

/// EPR distillation between `a` and `b` assisted by `helper`, executed at
/// finite `n` for `opts.trials` independent trials.
pub fn run_eoa_protocol<S: AsRef<str>>(
    psi: &PureState,
    a: &[S],
    b: &[S],
    helper: &[S],
    opts: &ProtocolOptions,
) -> Result<DistillReport> {
    let src = Source::new(psi, helper, opts.helper_basis.as_ref())?;
    check_groups(&src, a, b)?;
    let upper = crate::measures::eoa_upper_bound(psi, a, b)?;
    let e_bar = crate::measures::avg_entanglement(&src.ensemble()?, a)?;
    let chi = src.chi(a)?.min(src.chi(b)?);
    let m = Measurement::new(&src, chi, opts)?;
    let cut = Cut::new(&src, &m.copies, a, b)?;
    let cuts = [cut];
    let mut records = run_trials(opts.trials, opts.seed, opts.parallel, |t, rng| {
        let mut r = m.run(t, &cuts, rng)?;
        if opts.stratify {
            r.stratified = Some(m.stratified(&cuts[0], rng)?);
        }
        Ok(r)
    })?;
    for r in records.iter_mut() {
        r.state = None;
    }
    let n = opts.n as f64;
    let rates: Vec<f64> = records
        .iter()
        .map(|r| r.entropies.first().map_or(0.0, |e| e.bits / n))
        .collect();
    let (mean, std) = mean_std(&rates);
    let aborted = records.iter().filter(|r| r.outcome != Outcome::Success).count();
    let code_rates: Vec<f64> = records
        .iter()
        .filter(|r| r.outcome == Outcome::Success)
        .map(|r| (r.code_size as f64).log2() / n)
        .collect();
    let mean_code_rate = mean_std(&code_rates).0;
    let strat: Vec<f64> = records.iter().filter_map(|r| r.stratified.map(|e| e / n)).collect();
    let (strat_mean, strat_std) = mean_std(&strat);
    let max_completed = records.iter().map(|r| r.completed_average).fold(f64::NEG_INFINITY, f64::max);
    Ok(DistillReport {
        protocol: "eoa".into(),
        n: opts.n,
        delta: opts.delta,
        trials: opts.trials,
        seed: opts.seed,
        mean_rate: mean,
        std,
        upper_bound: upper,
        abort_rate: aborted as f64 / opts.trials.max(1) as f64,
        per_trial: records,
        eta: opts.eta,
        completion: opts.completion,
        chi,
        e_bar,
        mean_code_rate,
        ensemble_rate: e_bar + mean_code_rate,
        max_completed_average: max_completed,
        bound_holds: max_completed <= n * upper + 1e-9,
        stratified_rate: opts.stratify.then_some(strat_mean),
        stratified_std: opts.stratify.then_some(strat_std),
    })
}
