//! Command-line front end for `eoalab`.
//!
//! Every subcommand builds a JSON value and hands it to [`render`], so the
//! three output formats never disagree on a digit. Commands that draw
//! random numbers refuse to run without `--seed`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use eoalab::channels::{
    env_assisted_capacity, env_assisted_coding_demo, fit_unitary_mixture, CapacityOptions, CodingOptions,
    FitOptions,
};
use eoalab::distill::{
    disengage_fourth, run_eoa_protocol, run_ghz_protocol, Completion, FourOptions, ProtocolOptions,
};
use eoalab::measures::{
    concurrence, eoa_optimize, eoa_upper_bound, eof_2qubit, eof_optimize, ghz_epr_rates, mincut_entanglement,
    oneway_bc_ghz_bound, upsilon_rates, w_rates, EoaOptions, FormationProxy,
};
use eoalab::qcore::{entanglement_entropy, linalg::identity, schmidt, von_neumann_entropy, PureState};
use eoalab::states::{ensemble_from_helper_basis, hadamard_basis, make_aharonov, make_example1_phi, make_ghz};

pub mod catalog;
pub mod render;

use catalog::{resolve_channel, resolve_state};
pub use render::{render, Format};

/// Environment variable overriding the protocol memory cap, in MiB.
pub const MEM_CAP_ENV: &str = "EOALAB_MEM_CAP_MB";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] eoalab::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 3 for resource and size caps, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(eoalab::Error::ResourceCap { .. } | eoalab::Error::SizeCap { .. }) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "eoalab", version, about = "Entanglement of assistance and distillation toolkit")]
pub struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// RNG seed; required by stochastic subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for trial and restart loops (1 runs serially).
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Parties {
    /// Alice's parties, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "A")]
    pub a: Vec<String>,
    /// Bob's parties, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "B")]
    pub b: Vec<String>,
    /// Helper parties, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "C")]
    pub helper: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Computational,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Proxy {
    Wootters,
    Optimizer,
}

#[derive(Debug, Args)]
pub struct Protocol {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Typicality window on the type distance.
    #[arg(long, default_value_t = 0.2)]
    pub eta: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Helper measurement basis.
    #[arg(long, value_enum, default_value_t = Basis::Computational)]
    pub basis: Basis,
    /// Complete the sampled code with an abort outcome instead of running
    /// the full POVM.
    #[arg(long)]
    pub abort: bool,
    /// Also report the exact per-trial average over types.
    #[arg(long)]
    pub stratify: bool,
    /// Drop the per-trial records.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Aharonov,
    Aharonov2,
    Upsilon,
    Wstate,
    Ghz,
    LostFound,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Von Neumann entropies of marginals.
    Entropy {
        #[arg(long)]
        state: String,
        /// Marginal to evaluate; every single party when omitted.
        #[arg(long, value_delimiter = ',')]
        parties: Vec<String>,
    },
    /// Schmidt coefficients across `left | rest`.
    Schmidt {
        #[arg(long)]
        state: String,
        #[arg(long, value_delimiter = ',', required = true)]
        left: Vec<String>,
    },
    /// `min{S(a), S(b)}`.
    EoaBound {
        #[arg(long)]
        state: String,
        #[command(flatten)]
        parties: Parties,
    },
    /// Single-copy entanglement of assistance by helper-measurement search.
    EoaOpt {
        #[arg(long)]
        state: String,
        #[command(flatten)]
        parties: Parties,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Entanglement of formation of the `a, b` marginal.
    Eof {
        #[arg(long)]
        state: String,
        #[command(flatten)]
        parties: Parties,
        #[arg(long, value_enum, default_value_t = Proxy::Wootters)]
        proxy: Proxy,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Localisable entanglement as the minimum cut entropy.
    Mincut {
        #[arg(long)]
        state: String,
        #[arg(long, default_value = "A")]
        a: String,
        #[arg(long, default_value = "B")]
        b: String,
    },
    /// GHZ and EPR rates of a helper basis plus the one-way GHZ bound.
    Rates {
        #[arg(long)]
        state: String,
        #[arg(long, default_value = "C")]
        helper: String,
        #[arg(long, value_enum, default_value_t = Basis::Computational)]
        basis: Basis,
    },
    /// Finite-n EPR distillation assisted by the helper.
    Distill {
        #[arg(long)]
        state: String,
        #[command(flatten)]
        parties: Parties,
        #[command(flatten)]
        protocol: Protocol,
    },
    /// Finite-n coherent GHZ distillation.
    Ghz {
        #[arg(long)]
        state: String,
        #[command(flatten)]
        parties: Parties,
        #[command(flatten)]
        protocol: Protocol,
    },
    /// Disengage a fourth party by measuring it on n copies.
    FourParty {
        #[arg(long)]
        state: String,
        #[arg(long, default_value = "A")]
        a: String,
        #[arg(long, default_value = "B")]
        b: String,
        #[arg(long, default_value = "C")]
        c: String,
        #[arg(long, default_value = "D")]
        d: String,
        /// Continue with the EPR protocol on every post-measurement state.
        #[arg(long)]
        chain: bool,
        #[command(flatten)]
        protocol: Protocol,
    },
    /// Environment-assisted quantum capacity.
    Capacity {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
    },
    /// Closest mixture of unitaries in Choi trace distance.
    FitMixture {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 1)]
        n_copies: usize,
        #[arg(long, default_value_t = 2)]
        k_terms: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
    },
    /// Coherent information reached by environment-assisted coding.
    CodingDemo {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 2.0)]
        eta: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        summary: bool,
    },
    /// Regenerate the numbers of a worked example.
    Example {
        #[arg(value_enum)]
        name: Example,
    },
    /// List builtin states and channels.
    Catalog,
}

/// Settings shared by every command.
struct Ctx {
    seed: Option<u64>,
    parallel: bool,
    mem_cap_mb: Option<u64>,
}

impl Ctx {
    fn seed(&self, cmd: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage(format!("`{cmd}` is stochastic and needs --seed")))
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Lib(e.into()))
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn helper_dim(psi: &PureState, helper: &[String]) -> Result<usize> {
    let mut d = 1;
    for h in helper {
        let p = psi.layout().position(h)?;
        d *= psi.layout().parties()[p].dim;
    }
    Ok(d)
}

fn protocol_options(
    ctx: &Ctx,
    cmd: &str,
    psi: &PureState,
    helper: &[String],
    p: &Protocol,
) -> Result<ProtocolOptions> {
    let mut o = ProtocolOptions {
        n: p.n,
        delta: p.delta,
        eta: p.eta,
        trials: p.trials,
        seed: ctx.seed(cmd)?,
        completion: if p.abort {
            Completion::AbortOnComplement
        } else {
            Completion::FullPovm
        },
        helper_basis: match p.basis {
            Basis::Computational => None,
            Basis::Fourier => Some(hadamard_basis(helper_dim(psi, helper)?)),
        },
        parallel: ctx.parallel,
        stratify: p.stratify,
        ..Default::default()
    };
    if let Some(cap) = ctx.mem_cap_mb {
        o.mem_cap_mb = cap;
    }
    Ok(o)
}

fn drop_trials(mut v: Value, summary: bool) -> Value {
    if summary {
        if let Value::Object(m) = &mut v {
            m.shift_remove("per_trial");
        }
    }
    v
}

fn witness_json(e: &eoalab::states::Ensemble, a: &[&str]) -> Result<Value> {
    let ent = e
        .entries()
        .iter()
        .map(|(_, s)| entanglement_entropy(s, a))
        .collect::<eoalab::Result<Vec<f64>>>()?;
    Ok(json!({"probabilities": e.probabilities(), "entanglement": ent}))
}

fn aharonov_single_copy(parallel: bool) -> Result<Value> {
    let opts = EoaOptions {
        restarts: 20,
        seed: 1,
        parallel,
        ..Default::default()
    };
    let r = eoa_optimize(&make_aharonov(), &["A"], &["B"], &["C"], &opts)?;
    Ok(json!({"lower_bound": r.lower_bound, "upper_bound": r.upper_bound}))
}

fn example(name: Example, ctx: &Ctx) -> Result<Value> {
    match name {
        Example::Aharonov => aharonov_single_copy(ctx.parallel),
        Example::Aharonov2 => {
            let phi = make_example1_phi();
            let s = schmidt(&phi, &["A1", "A2"])?;
            // the exact spectrum is dyadic; snap away eigensolver noise
            let vals: Vec<f64> = s
                .values()
                .iter()
                .filter(|&&x| x > 1e-12)
                .map(|x| (x * 1e12).round() / 1e12)
                .collect();
            Ok(json!({"schmidt": vals, "entropy": s.entropy()}))
        }
        Example::Upsilon => {
            let mut rows = Vec::new();
            for k in 0..=10 {
                let a2 = k as f64 * 0.05;
                let r = upsilon_rates(a2)?;
                let u = eoalab::states::make_upsilon(a2)?;
                let bound = oneway_bc_ghz_bound(&u, "A", &FormationProxy::Wootters)?;
                let mut v = to_value(&r)?;
                v["oneway_bound_helper_a"] = json!(bound.value);
                rows.push(v);
            }
            Ok(json!({ "rows": rows }))
        }
        Example::Wstate => to_value(&w_rates()?),
        Example::Ghz => {
            let g = run_ghz_protocol(
                &make_ghz(3, 2)?,
                &["A"],
                &["B"],
                &["C"],
                &ProtocolOptions {
                    n: 2,
                    trials: 50,
                    seed: 11,
                    eta: 2.0,
                    parallel: ctx.parallel,
                    ..Default::default()
                },
            )?;
            let g4 = make_ghz(4, 2)?;
            Ok(json!({
                "n": g.n,
                "trials": g.trials,
                "seed": g.seed,
                "mean_fidelity": g.mean_fidelity,
                "min_fidelity": g.min_fidelity,
                "mean_rate": g.mean_rate,
                "abort_rate": g.abort_rate,
                "mincut_ghz4": mincut_entanglement(&g4, "A", "B")?.value,
            }))
        }
        Example::LostFound => {
            let specs = [
                "identity:2",
                "identity:3",
                "depolarizing:1.0",
                "dephasing:0.5",
                "amplitude-damping:0.5",
                "aharonov-choi",
            ];
            let mut rows = Vec::new();
            for s in specs {
                let r = env_assisted_capacity(&resolve_channel(s)?, &CapacityOptions::default())?;
                rows.push(json!({"channel": s, "capacity": r.capacity, "gap": r.gap}));
            }
            Ok(json!({ "channels": rows }))
        }
    }
}

fn catalog_json() -> Value {
    let list = |xs: &[(&str, &str)]| -> Vec<Value> {
        xs.iter().map(|(n, d)| json!({"name": n, "description": d})).collect()
    };
    json!({"states": list(catalog::STATES), "channels": list(catalog::CHANNELS)})
}

fn execute(cmd: &Command, ctx: &Ctx) -> Result<Value> {
    match cmd {
        Command::Entropy { state, parties } => {
            let psi = resolve_state(state)?;
            if parties.is_empty() {
                let mut m = serde_json::Map::new();
                for l in psi.layout().labels() {
                    m.insert(l.to_string(), json!(von_neumann_entropy(&psi.reduced(&[l])?)));
                }
                Ok(json!({ "marginals": m }))
            } else {
                let s = von_neumann_entropy(&psi.reduced(parties)?);
                Ok(json!({"parties": parties, "entropy": s}))
            }
        }
        Command::Schmidt { state, left } => {
            let s = schmidt(&resolve_state(state)?, left)?;
            Ok(json!({"schmidt": s.values(), "entropy": s.entropy()}))
        }
        Command::EoaBound { state, parties } => {
            let v = eoa_upper_bound(&resolve_state(state)?, &parties.a, &parties.b)?;
            Ok(json!({ "upper_bound": v }))
        }
        Command::EoaOpt {
            state,
            parties,
            restarts,
            max_iter,
        } => {
            let opts = EoaOptions {
                restarts: *restarts,
                max_iter: *max_iter,
                seed: ctx.seed("eoa-opt")?,
                parallel: ctx.parallel,
                ..Default::default()
            };
            let psi = resolve_state(state)?;
            let r = eoa_optimize(&psi, &parties.a, &parties.b, &parties.helper, &opts)?;
            Ok(json!({
                "lower_bound": r.lower_bound,
                "upper_bound": r.upper_bound,
                "witness": witness_json(&r.witness, &strs(&parties.a))?,
                "trace": to_value(&r.trace)?,
            }))
        }
        Command::Eof {
            state,
            parties,
            proxy,
            restarts,
        } => {
            let psi = resolve_state(state)?;
            match proxy {
                Proxy::Wootters => {
                    let mut keep = parties.a.clone();
                    keep.extend(parties.b.iter().cloned());
                    let rho = psi.reduced(&keep)?;
                    Ok(json!({
                        "eof": eof_2qubit(&rho)?,
                        "concurrence": concurrence(&rho)?,
                        "proxy": "wootters",
                    }))
                }
                Proxy::Optimizer => {
                    let opts = EoaOptions {
                        restarts: *restarts,
                        seed: ctx.seed("eof --proxy optimizer")?,
                        parallel: ctx.parallel,
                        ..Default::default()
                    };
                    let r = eof_optimize(&psi, &parties.a, &parties.b, &parties.helper, &opts)?;
                    Ok(json!({
                        "eof": r.value,
                        "proxy": "optimizer",
                        "witness": witness_json(&r.witness, &strs(&parties.a))?,
                        "trace": to_value(&r.trace)?,
                    }))
                }
            }
        }
        Command::Mincut { state, a, b } => to_value(&mincut_entanglement(&resolve_state(state)?, a, b)?),
        Command::Rates { state, helper, basis } => {
            let psi = resolve_state(state)?;
            let d = helper_dim(&psi, std::slice::from_ref(helper))?;
            let u = match basis {
                Basis::Computational => identity(d),
                Basis::Fourier => hadamard_basis(d),
            };
            let e = ensemble_from_helper_basis(&psi, helper, &u)?;
            let r = ghz_epr_rates(&psi, helper, &e)?;
            let rest: Vec<&str> = psi.layout().labels().into_iter().filter(|l| l != helper).collect();
            let upper = eoa_upper_bound(&psi, &rest[..1], &rest[1..])?;
            // Wootters needs two qubits; otherwise the optimizer stands in
            // for E_F and a seed is needed
            let qubits = rest.iter().all(|l| helper_dim(&psi, &[l.to_string()]).ok() == Some(2));
            let bound = if qubits {
                Some(oneway_bc_ghz_bound(&psi, helper, &FormationProxy::Wootters)?)
            } else if let Some(seed) = ctx.seed {
                let opts = EoaOptions {
                    seed,
                    parallel: ctx.parallel,
                    ..Default::default()
                };
                Some(oneway_bc_ghz_bound(&psi, helper, &FormationProxy::Optimizer(opts))?)
            } else {
                None
            };
            Ok(json!({
                "helper": helper,
                "chi": r.chi,
                "e_bar": r.e_bar,
                "upper_bound": upper,
                "oneway_bound": to_value(&bound)?,
            }))
        }
        Command::Distill {
            state,
            parties,
            protocol,
        } => {
            let psi = resolve_state(state)?;
            let o = protocol_options(ctx, "distill", &psi, &parties.helper, protocol)?;
            let r = run_eoa_protocol(&psi, &parties.a, &parties.b, &parties.helper, &o)?;
            Ok(drop_trials(to_value(&r)?, protocol.summary))
        }
        Command::Ghz {
            state,
            parties,
            protocol,
        } => {
            let psi = resolve_state(state)?;
            let o = protocol_options(ctx, "ghz", &psi, &parties.helper, protocol)?;
            let r = run_ghz_protocol(&psi, &parties.a, &parties.b, &parties.helper, &o)?;
            Ok(drop_trials(to_value(&r)?, protocol.summary))
        }
        Command::FourParty {
            state,
            a,
            b,
            c,
            d,
            chain,
            protocol,
        } => {
            let psi = resolve_state(state)?;
            let o = protocol_options(ctx, "four-party", &psi, std::slice::from_ref(d), protocol)?;
            let fo = FourOptions {
                chain: chain.then(|| ProtocolOptions {
                    helper_basis: None,
                    ..o.clone()
                }),
                protocol: o,
            };
            let r = disengage_fourth(&psi, a, b, c, d, &fo)?;
            Ok(drop_trials(to_value(&r)?, protocol.summary))
        }
        Command::Capacity { channel, tol, max_iter } => {
            let opts = CapacityOptions {
                tol: *tol,
                max_iter: *max_iter,
            };
            to_value(&env_assisted_capacity(&resolve_channel(channel)?, &opts)?)
        }
        Command::FitMixture {
            channel,
            n_copies,
            k_terms,
            restarts,
        } => {
            let opts = FitOptions {
                n_copies: *n_copies,
                k_terms: *k_terms,
                restarts: *restarts,
                seed: ctx.seed("fit-mixture")?,
                parallel: ctx.parallel,
                ..Default::default()
            };
            to_value(&fit_unitary_mixture(&resolve_channel(channel)?, &opts)?)
        }
        Command::CodingDemo {
            channel,
            n,
            delta,
            eta,
            trials,
            summary,
        } => {
            let mut protocol = ProtocolOptions {
                n: *n,
                delta: *delta,
                eta: *eta,
                trials: *trials,
                seed: ctx.seed("coding-demo")?,
                parallel: ctx.parallel,
                ..Default::default()
            };
            if let Some(cap) = ctx.mem_cap_mb {
                protocol.mem_cap_mb = cap;
            }
            let opts = CodingOptions {
                protocol,
                ..Default::default()
            };
            let r = env_assisted_coding_demo(&resolve_channel(channel)?, &opts)?;
            Ok(drop_trials(to_value(&r)?, *summary))
        }
        Command::Example { name } => example(*name, ctx),
        Command::Catalog => Ok(catalog_json()),
    }
}

fn mem_cap_from_env() -> Result<Option<u64>> {
    match std::env::var(MEM_CAP_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{MEM_CAP_ENV} must be a whole number of MiB, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

/// Runs a parsed command line and returns the rendered report.
pub fn run(cli: &Cli) -> Result<String> {
    let parallel = match cli.parallel {
        Some(0) => return Err(CliError::Usage("--parallel needs at least one thread".into())),
        Some(n) if n > 1 => {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            true
        }
        _ => false,
    };
    let ctx = Ctx {
        seed: cli.seed,
        parallel,
        mem_cap_mb: mem_cap_from_env()?,
    };
    let v = execute(&cli.command, &ctx)?;
    let format = if cli.json { Format::Json } else { cli.format };
    let text = render(&v, format);
    match &cli.output {
        Some(path) => {
            std::fs::write(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
