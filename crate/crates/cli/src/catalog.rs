//! Named states and channels.
//!
//! A spec is either `builtin:<name>[:args]`, a bare catalog name, or a path
//! to a state / channel JSON file. Bare names win over files of the same
//! name; prefix a path with `./` to force a file.

use eoalab::channels::{
    aharonov_choi, amplitude_damping, dephasing, depolarizing, identity_channel, load_channel, QuantumChannel,
};
use eoalab::qcore::PureState;
use eoalab::states::{load_state, make_aharonov, make_epr, make_example1_phi, make_ghz, make_upsilon, make_w};

use crate::CliError;

/// Stable list of builtin state names with their argument forms.
pub const STATES: &[(&str, &str)] = &[
    ("ghz:M[:d]", "M-party GHZ state of local dimension d (default 2)"),
    ("w", "three-qubit W state"),
    ("aharonov", "qutrit determinant state on A, B, C"),
    ("upsilon:a2", "Υ family with α² = a2 on A, B, C"),
    ("epr[:d]", "maximally entangled pair of dimension d (default 2)"),
    ("example1-phi", "two-copy witness state on A1, A2, B1, B2"),
];

/// Stable list of builtin channel names with their argument forms.
pub const CHANNELS: &[(&str, &str)] = &[
    ("identity:d", "identity on a d-level system"),
    ("depolarizing:p[:d]", "ρ ↦ (1 − p)ρ + p·I/d (default d = 2)"),
    ("dephasing:p[:d]", "off-diagonals scaled by 1 − p (default d = 2)"),
    ("amplitude-damping:g", "qubit amplitude damping with decay g"),
    ("aharonov-choi", "unital qutrit channel whose Choi state is the Aharonov marginal"),
];

fn split(spec: &str) -> (bool, &str, Vec<&str>) {
    let (explicit, rest) = match spec.strip_prefix("builtin:") {
        Some(r) => (true, r),
        None => (false, spec),
    };
    let mut parts = rest.split(':');
    let name = parts.next().unwrap_or("");
    (explicit, name, parts.collect())
}

fn num<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, CliError> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("cannot parse {what} from `{s}`")))
}

fn arity(name: &str, args: &[&str], min: usize, max: usize) -> Result<(), CliError> {
    if args.len() < min || args.len() > max {
        return Err(CliError::Usage(format!("wrong number of arguments for builtin `{name}`")));
    }
    Ok(())
}

fn builtin_state(name: &str, args: &[&str]) -> Option<Result<PureState, CliError>> {
    let r = match name {
        "ghz" => arity(name, args, 1, 2).and_then(|_| {
            let m = num("party count", args[0])?;
            let d = args.get(1).map(|s| num("dimension", s)).transpose()?.unwrap_or(2);
            Ok(make_ghz(m, d)?)
        }),
        "w" => arity(name, args, 0, 0).map(|_| make_w()),
        "aharonov" => arity(name, args, 0, 0).map(|_| make_aharonov()),
        "upsilon" => arity(name, args, 1, 1).and_then(|_| Ok(make_upsilon(num("α²", args[0])?)?)),
        "epr" => arity(name, args, 0, 1).and_then(|_| {
            let d = args.first().map(|s| num("dimension", s)).transpose()?.unwrap_or(2);
            Ok(make_epr(d)?)
        }),
        "example1-phi" => arity(name, args, 0, 0).map(|_| make_example1_phi()),
        _ => return None,
    };
    Some(r)
}

fn builtin_channel(name: &str, args: &[&str]) -> Option<Result<QuantumChannel, CliError>> {
    let dim = |i: usize| -> Result<usize, CliError> {
        args.get(i).map(|s| num("dimension", s)).transpose().map(|d| d.unwrap_or(2))
    };
    let r = match name {
        "identity" => arity(name, args, 1, 1).and_then(|_| Ok(identity_channel(num("dimension", args[0])?)?)),
        "depolarizing" => arity(name, args, 1, 2).and_then(|_| Ok(depolarizing(num("p", args[0])?, dim(1)?)?)),
        "dephasing" => arity(name, args, 1, 2).and_then(|_| Ok(dephasing(num("p", args[0])?, dim(1)?)?)),
        "amplitude-damping" => arity(name, args, 1, 1).and_then(|_| Ok(amplitude_damping(num("γ", args[0])?)?)),
        "aharonov-choi" => arity(name, args, 0, 0).map(|_| aharonov_choi()),
        _ => return None,
    };
    Some(r)
}

pub fn resolve_state(spec: &str) -> Result<PureState, CliError> {
    let (explicit, name, args) = split(spec);
    match builtin_state(name, &args) {
        Some(r) => r,
        None if explicit => Err(CliError::Usage(format!("unknown builtin state `{name}`"))),
        None => Ok(load_state(spec)?),
    }
}

pub fn resolve_channel(spec: &str) -> Result<QuantumChannel, CliError> {
    let (explicit, name, args) = split(spec);
    match builtin_channel(name, &args) {
        Some(r) => r,
        None if explicit => Err(CliError::Usage(format!("unknown builtin channel `{name}`"))),
        None => Ok(load_channel(spec)?),
    }
}
