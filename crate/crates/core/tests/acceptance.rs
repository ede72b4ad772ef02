//! Acceptance gate: one PASS/FAIL line per criterion. Reference values
//! are computed here from closed forms or by independent brute force.

use std::time::{Duration, Instant};

use rand::Rng;

use eoalab::channels::{
    aharonov_choi, amplitude_damping, capacity_objective, depolarizing, env_assisted_capacity,
    fit_unitary_mixture, identity_channel, random_channel, unitary_mixture, CapacityOptions, FitOptions,
};
use eoalab::distill::{
    disengage_fourth, enumerate_types, four_party_code_size, povm_constant, run_eoa_protocol, run_ghz_protocol,
    type_projector, Code, FourOptions, Outcome, ProtocolOptions, TypeClass,
};
use eoalab::measures::{
    avg_entanglement, eoa_optimize, eoa_upper_bound, mincut_entanglement, oneway_bc_ghz_bound, upsilon_rates,
    w_rates, EoaOptions, FormationProxy,
};
use eoalab::qcore::random::{haar_unitary, random_pure_state, seeded, ProtocolRng};
use eoalab::qcore::{entanglement_entropy, schmidt, trace_norm, CMatrix, CVector, Layout, PureState, C64};
use eoalab::states::{make_aharonov, make_example1_phi, make_ghz, make_upsilon, make_w, Ensemble};

type Verdict = Result<(bool, String), String>;

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn cx(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s/{}s", e.as_secs_f64(), limit.as_secs()))
}

fn psd_power(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let h = (m + m.adjoint()) * cx(0.5);
    let e = h.symmetric_eigen();
    let d = CMatrix::from_diagonal(&e.eigenvalues.map(|l| cx(f(l))));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

fn ac1() -> Verdict {
    let t = Instant::now();
    let phi = make_example1_phi();
    let s = schmidt(&phi, &["A1", "A2"]).map_err(err)?;
    let want = [0.25, 0.25, 0.125, 0.125, 0.125, 0.125];
    let v = s.values();
    let mut dev: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        dev = dev.max((x - want.get(i).copied().unwrap_or(0.0)).abs());
    }
    let e = entanglement_entropy(&phi, &["A1", "A2"]).map_err(err)?;
    let (fast, time) = within(t, Duration::from_secs(1));
    Ok((
        dev < 1e-9 && (e - 2.5).abs() < 1e-9 && fast,
        format!("max spectrum dev {dev:.1e}, E = {e:.12}, {time}"),
    ))
}

fn ac2() -> Verdict {
    let t = Instant::now();
    let alpha = make_aharonov();
    let opts = EoaOptions {
        restarts: 20,
        seed: 1,
        ..Default::default()
    };
    let r = eoa_optimize(&alpha, &["A"], &["B"], &["C"], &opts).map_err(err)?;
    let (fast, time) = within(t, Duration::from_secs(60));
    let ok = r.lower_bound >= 0.999 && r.lower_bound <= 1.0 + 1e-9 && (r.upper_bound - 3f64.log2()).abs() < 1e-9;
    Ok((
        ok && fast,
        format!("lower {:.9}, upper {:.12}, {time}", r.lower_bound, r.upper_bound),
    ))
}

/// `X^a Z^b` on a qutrit.
fn weyl3(a: usize, b: usize) -> CMatrix {
    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    CMatrix::from_fn(3, 3, |i, j| if i == (j + a) % 3 { w.powu((b * j) as u32) } else { cx(0.0) })
}

/// `(α^{AB})^{⊗2}` on `A1 A2 B1 B2`: both factors are the normalized
/// antisymmetric projector on `3 ⊗ 3`.
fn alpha_pair_marginal() -> CMatrix {
    let anti = |x: usize, y: usize, xp: usize, yp: usize| -> f64 {
        let id = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
        (id(x, xp) * id(y, yp) - id(x, yp) * id(y, xp)) / 6.0
    };
    let idx = |i: usize| (i / 27, (i / 9) % 3, (i / 3) % 3, i % 3);
    CMatrix::from_fn(81, 81, |i, j| {
        let (a1, a2, b1, b2) = idx(i);
        let (c1, c2, d1, d2) = idx(j);
        cx(anti(a1, b1, c1, d1) * anti(a2, b2, c2, d2))
    })
}

/// `(U ⊗ V ⊗ U ⊗ V)φ` via the `A1A2 × B1B2` coefficient matrix.
fn local_rotate(phi: &CMatrix, u: &CMatrix, v: &CMatrix) -> CMatrix {
    let k = u.kronecker(v);
    &k * phi * k.transpose()
}

fn ac3() -> Verdict {
    let t = Instant::now();
    let phi = make_example1_phi();
    let layout = phi.layout().clone();
    let m = CMatrix::from_fn(9, 9, |i, j| phi.amplitudes()[i * 9 + j]);
    let mut states = Vec::with_capacity(81);
    for a in 0..9 {
        for b in 0..9 {
            let x = local_rotate(&m, &weyl3(a / 3, a % 3), &weyl3(b / 3, b % 3));
            let v = CVector::from_fn(81, |i, _| x[(i / 9, i % 9)]);
            states.push(PureState::new(layout.clone(), v).map_err(err)?);
        }
    }
    let e = Ensemble::uniform(states).map_err(err)?;
    let avg = avg_entanglement(&e, &["A1", "A2"]).map_err(err)?;
    let target = alpha_pair_marginal();
    let witness_dist = 0.5 * trace_norm(&(e.mixture().matrix() - &target));

    // Haar Monte Carlo of the same presentation
    let mut rng = seeded(2024);
    let samples = 100_000;
    let mut acc = CMatrix::zeros(81, 81);
    let mut v = CVector::zeros(81);
    for _ in 0..samples {
        let x = local_rotate(&m, &haar_unitary(3, &mut rng), &haar_unitary(3, &mut rng));
        for i in 0..81 {
            v[i] = x[(i / 9, i % 9)];
        }
        acc.ger(cx(1.0 / samples as f64), &v, &v.conjugate(), cx(1.0));
    }
    let mc_dist = 0.5 * trace_norm(&(acc - &target));
    let ok = avg >= 2.5 - 1e-6 && witness_dist < 1e-9 && mc_dist <= 0.05;
    Ok((
        ok,
        format!(
            "81-state witness: avg E = {avg:.9}, distance to α⊗α marginal {witness_dist:.1e}; Haar MC (1e5) distance {mc_dist:.4}, {:.1}s",
            t.elapsed().as_secs_f64()
        ),
    ))
}

fn ac4() -> Verdict {
    let t = Instant::now();
    let w = make_w();
    let upper = eoa_upper_bound(&w, &["A"], &["B"]).map_err(err)?;
    let r = w_rates().map_err(err)?;
    let want_upper = h2(1.0 / 3.0);
    // Wootters for W^{AB}: C = 2/3
    let c: f64 = 2.0 / 3.0;
    let want_eof = h2((1.0 + (1.0 - c * c).sqrt()) / 2.0);
    let want_ghz = want_upper - want_eof;
    let want_comb = want_upper - want_eof / 2.0;
    let (fast, time) = within(t, Duration::from_secs(1));
    let ok = (upper - want_upper).abs() < 1e-5
        && (upper - 0.91830).abs() < 1e-5
        && (r.eof - 0.55005).abs() < 1e-4
        && (r.eof - want_eof).abs() < 1e-9
        && (r.ghz_rate - 0.36825).abs() < 1e-3
        && (r.ghz_rate - want_ghz).abs() < 1e-9
        && (r.combined_ghz - 0.64327).abs() < 1e-3
        && (r.combined_ghz - want_comb).abs() < 1e-9;
    Ok((
        ok && fast,
        format!(
            "bound {upper:.5}, E_F {:.5}, GHZ {:.5}, combined {:.5}, {time}",
            r.eof, r.ghz_rate, r.combined_ghz
        ),
    ))
}

fn ac5() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for k in 0..=10 {
        let a2 = k as f64 * 0.05;
        let ab = (a2 * (1.0 - a2)).sqrt();
        let f = h2(0.5 - ab);
        let r = upsilon_rates(a2).map_err(err)?;
        let u = make_upsilon(a2).map_err(err)?;
        let bound = oneway_bc_ghz_bound(&u, "A", &FormationProxy::Wootters).map_err(err)?;
        worst = worst.max((r.eof_bc - f).abs()).max((bound.value - (1.0 - f)).abs());
        worst_b = worst_b
            .max((r.helper_b.ghz - h2(a2)).abs())
            .max(r.helper_b.epr.abs());
    }
    let (fast, time) = within(t, Duration::from_secs(1));
    Ok((
        worst < 1e-6 && worst_b < 1e-9 && fast,
        format!("max dev E_F/bound {worst:.1e}, helper-B dev {worst_b:.1e}, {time}"),
    ))
}

fn ac6() -> Verdict {
    let t = Instant::now();
    let tc = TypeClass::new(vec![2, 2]).map_err(err)?;
    let members = tc.members(1 << 10).map_err(err)?;
    let m = members.len();
    let n_code = 2;
    let c = povm_constant(&tc, n_code).map_err(err)?;
    // every 2-subset with both Fourier outcomes, built by hand
    let mut sum = CMatrix::zeros(16, 16);
    let index = |s: &[usize]| s.iter().fold(0, |acc, &x| acc * 2 + x);
    for i in 0..m {
        for j in (i + 1)..m {
            for alpha in 0..n_code {
                let mut v = CVector::zeros(16);
                for (beta, s) in [&members[i], &members[j]].into_iter().enumerate() {
                    let ph = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (alpha * beta) as f64 / n_code as f64);
                    v[index(s)] += ph / (n_code as f64).sqrt();
                }
                sum.ger(cx(c / n_code as f64), &v, &v.conjugate(), cx(1.0));
            }
        }
    }
    let mut pi = CMatrix::zeros(16, 16);
    for s in &members {
        pi[(index(s), index(s))] = cx(1.0);
    }
    let povm_dev = (sum - &pi).norm();
    // the library codes agree with the hand-built vectors
    let code = Code::new(tc.clone(), vec![members[0].clone(), members[1].clone()]).map_err(err)?;
    let lib = eoalab::distill::fourier_vector(&code, 1).map_err(err)?;
    let mut hand = CVector::zeros(16);
    hand[index(&members[0])] += cx(1.0 / 2f64.sqrt());
    hand[index(&members[1])] -= cx(1.0 / 2f64.sqrt());
    let vec_dev = (lib - hand).norm();
    let mut total = CMatrix::zeros(16, 16);
    for p in enumerate_types(4, 2, 1 << 10).map_err(err)? {
        total += type_projector(&p, 1 << 10).map_err(err)?;
    }
    let type_dev = (total - CMatrix::identity(16, 16)).norm();
    let (fast, time) = within(t, Duration::from_secs(1));
    let ok = m == 6 && (c - 0.4).abs() < 1e-15 && povm_dev < 1e-10 && vec_dev < 1e-12 && type_dev < 1e-12;
    Ok((
        ok && fast,
        format!("M = {m}, c = {c}, ‖ΣcΘ/N − Π‖ = {povm_dev:.1e}, ‖ΣΠ_P − I‖ = {type_dev:.1e}, {time}"),
    ))
}

/// Every type is kept (`‖P − q‖₁ ≤ 2` always): at n ≤ 6 a narrow
/// typicality window discards most of the probability mass and the
/// per-copy rate then tracks which types happen to fall inside it.
fn eoa_opts(n: usize, trials: usize, seed: u64) -> ProtocolOptions {
    ProtocolOptions {
        n,
        trials,
        seed,
        eta: 2.0,
        stratify: true,
        ..Default::default()
    }
}

fn ac7() -> Verdict {
    let t = Instant::now();
    let cases: Vec<(&str, PureState, [&str; 3])> = vec![
        ("W", make_w(), ["A", "B", "C"]),
        ("Υ(0.3)", make_upsilon(0.3).map_err(err)?, ["B", "C", "A"]),
        ("GHZ", make_ghz(3, 2).map_err(err)?, ["A", "B", "C"]),
    ];
    let mut ok = true;
    let mut lines = vec![];
    for (name, psi, [a, b, c]) in &cases {
        let r = run_eoa_protocol(psi, &[*a], &[*b], &[*c], &eoa_opts(4, 500, 42)).map_err(err)?;
        let n = 4.0;
        let bound = n * r.upper_bound;
        let mean_e = n * r.mean_rate;
        let sigma = n * r.std / (r.trials as f64).sqrt();
        let holds = r.bound_holds && mean_e <= bound + 4.0 * sigma + 1e-9;
        // trend on the stratified estimate of the same mean
        let mut trend = vec![];
        for nn in [2, 4, 6] {
            let rr = run_eoa_protocol(psi, &[*a], &[*b], &[*c], &eoa_opts(nn, 500, 42)).map_err(err)?;
            trend.push(rr.stratified_rate.ok_or("stratified rate missing")?);
        }
        let monotone = trend.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        ok &= holds && monotone;
        lines.push(format!(
            "{name}: max completed Σp·E(ϑ) {:.4} ≤ {bound:.4}, mean {mean_e:.4}±{sigma:.4}, E/n over n=2,4,6 {:.4}/{:.4}/{:.4}{}",
            r.max_completed_average,
            trend[0],
            trend[1],
            trend[2],
            if monotone { "" } else { " (not monotone)" }
        ));
    }
    let (fast, time) = within(t, Duration::from_secs(300));
    lines.push(time);
    Ok((ok && fast, lines.join("; ")))
}

/// `|⟨target| (controlled permutations)(V_a ⊗ V_b) ζ⟩|²` with every
/// operator written out on `A^n ⊗ B^n ⊗ R_a ⊗ R_b ⊗ C`.
fn composed_fidelity(letters: &[CMatrix], code: &[Vec<usize>]) -> f64 {
    let n = code[0].len();
    let dl = letters[0].nrows();
    let da = dl.pow(n as u32);
    let big_n = code.len();
    let r = big_n + 1;
    // product state X_J as a da × da coefficient matrix (a rows, b columns)
    let product = |seq: &[usize]| -> CMatrix {
        CMatrix::from_fn(da, da, |x, y| {
            let mut amp = cx(1.0);
            for k in 0..n {
                let p = dl.pow((n - 1 - k) as u32);
                amp *= letters[seq[k]][((x / p) % dl, (y / p) % dl)];
            }
            amp
        })
    };
    let xs: Vec<CMatrix> = code.iter().map(|s| product(s)).collect();
    let pgm_roots = |rhos: Vec<CMatrix>| -> Vec<CMatrix> {
        let mut s = CMatrix::zeros(da, da);
        for x in &rhos {
            s += x;
        }
        let inv = psd_power(&s, |l| if l > 1e-12 { 1.0 / l.sqrt() } else { 0.0 });
        let supp = psd_power(&s, |l| if l > 1e-12 { 1.0 } else { 0.0 });
        let mut out: Vec<CMatrix> = rhos.iter().map(|x| psd_power(&(&inv * x * &inv), |l| l.max(0.0).sqrt())).collect();
        out.push(CMatrix::identity(da, da) - supp);
        out
    };
    let roots_a = pgm_roots(xs.iter().map(|x| x * x.adjoint()).collect());
    let roots_b = pgm_roots(xs.iter().map(|x| x.transpose() * x.conjugate()).collect());
    // lexicographically first rearrangement and the copy maps onto it
    let mut bar = code[0].clone();
    bar.sort();
    let perm = |seq: &[usize]| -> CMatrix {
        let mut used = vec![false; n];
        let sigma: Vec<usize> = bar
            .iter()
            .map(|&t| {
                let k = (0..n).find(|&k| !used[k] && seq[k] == t).unwrap();
                used[k] = true;
                k
            })
            .collect();
        let mut p = CMatrix::zeros(da, da);
        for old in 0..da {
            let digits: Vec<usize> = (0..n).map(|k| (old / dl.pow((n - 1 - k) as u32)) % dl).collect();
            let new = (0..n).fold(0, |acc, k| acc * dl + digits[sigma[k]]);
            p[(new, old)] = cx(1.0);
        }
        p
    };
    let mut perms: Vec<CMatrix> = code.iter().map(|s| perm(s)).collect();
    perms.push(CMatrix::identity(da, da));
    // full vectors, index ((((a·da + b)·r + ra)·r + rb)·N + c)
    let dim = da * da * r * r * big_n;
    let at = |a: usize, b: usize, ra: usize, rb: usize, c: usize| (((a * da + b) * r + ra) * r + rb) * big_n + c;
    let mut zeta = CVector::zeros(dim);
    for (beta, x) in xs.iter().enumerate() {
        for a in 0..da {
            for b in 0..da {
                zeta[at(a, b, 0, 0, beta)] = x[(a, b)] / (big_n as f64).sqrt();
            }
        }
    }
    // V_a: |x⟩|0⟩ ↦ Σ_γ √D_γ|x⟩|γ⟩, then the controlled permutation; same for b
    let mut op_a = CMatrix::zeros(da * r, da);
    for g in 0..r {
        let block = &perms[g] * &roots_a[g];
        op_a.view_mut((g * da, 0), (da, da)).copy_from(&block);
    }
    let mut op_b = CMatrix::zeros(da * r, da);
    for g in 0..r {
        let block = &perms[g] * &roots_b[g];
        op_b.view_mut((g * da, 0), (da, da)).copy_from(&block);
    }
    let mut out = CVector::zeros(dim);
    for c in 0..big_n {
        for a in 0..da {
            for b in 0..da {
                let z = zeta[at(a, b, 0, 0, c)];
                if z == cx(0.0) {
                    continue;
                }
                for ga in 0..r {
                    for a2 in 0..da {
                        let ua = op_a[(ga * da + a2, a)];
                        if ua == cx(0.0) {
                            continue;
                        }
                        for gb in 0..r {
                            for b2 in 0..da {
                                out[at(a2, b2, ga, gb, c)] += ua * op_b[(gb * da + b2, b)] * z;
                            }
                        }
                    }
                }
            }
        }
    }
    let target_x = product(&bar);
    let mut target = CVector::zeros(dim);
    for beta in 0..big_n {
        for a in 0..da {
            for b in 0..da {
                target[at(a, b, beta, beta, beta)] = target_x[(a, b)] / (big_n as f64).sqrt();
            }
        }
    }
    target.dotc(&out).norm_sqr()
}

fn ac8() -> Verdict {
    let t = Instant::now();
    let ghz = make_ghz(3, 2).map_err(err)?;
    let g = run_ghz_protocol(
        &ghz,
        &["A"],
        &["B"],
        &["C"],
        &ProtocolOptions {
            n: 2,
            trials: 50,
            seed: 11,
            eta: 2.0,
            ..Default::default()
        },
    )
    .map_err(err)?;
    let ghz_ok = g.abort_rate == 0.0 && (g.min_fidelity - 1.0).abs() < 1e-9;

    let w = make_w();
    let r = run_ghz_protocol(
        &w,
        &["A"],
        &["B"],
        &["C"],
        &ProtocolOptions {
            n: 4,
            trials: 20,
            seed: 11,
            delta: 0.0,
            ..Default::default()
        },
    )
    .map_err(err)?;
    // W with C measured in the computational basis: (|01⟩+|10⟩)/√2 and |00⟩
    let h = 1.0 / 2f64.sqrt();
    let letters = vec![
        CMatrix::from_row_slice(2, 2, &[cx(0.0), cx(h), cx(h), cx(0.0)]),
        CMatrix::from_row_slice(2, 2, &[cx(1.0), cx(0.0), cx(0.0), cx(0.0)]),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut largest_code = 0;
    let mut fids = vec![];
    for rec in &r.per_trial {
        if rec.outcome != Outcome::Success {
            continue;
        }
        let f = rec.fidelity.ok_or("missing fidelity")?;
        let oracle = composed_fidelity(&letters, &rec.code);
        worst = worst.max((f - oracle).abs());
        checked += 1;
        largest_code = largest_code.max(rec.code_size);
        fids.push(f);
    }
    let (fast, time) = within(t, Duration::from_secs(120));
    let ok = ghz_ok && checked > 0 && largest_code >= 2 && worst < 1e-8;
    Ok((
        ok && fast,
        format!(
            "GHZ n=2 min fidelity {:.12}; W n=4: {checked} trials, N up to {largest_code}, mean fidelity {:.6}, max |lib − oracle| {worst:.1e}, {time}",
            g.min_fidelity, r.mean_fidelity
        ),
    ))
}

fn ac9() -> Verdict {
    let t = Instant::now();
    let o = CapacityOptions::default();
    let c2 = env_assisted_capacity(&identity_channel(2).map_err(err)?, &o).map_err(err)?.capacity;
    let c3 = env_assisted_capacity(&identity_channel(3).map_err(err)?, &o).map_err(err)?.capacity;
    let cd = env_assisted_capacity(&depolarizing(1.0, 2).map_err(err)?, &o).map_err(err)?.capacity;
    let gamma = 0.5;
    let ca = env_assisted_capacity(&amplitude_damping(gamma).map_err(err)?, &o).map_err(err)?.capacity;
    // Bloch-grid oracle over diagonal inputs (phases only lower S(T(ρ)))
    let grid = 100_000;
    let oracle = (0..=grid)
        .map(|i| {
            let p = i as f64 / grid as f64;
            h2(p).min(h2((1.0 - gamma) * p))
        })
        .fold(0.0, f64::max);
    let mut rng = seeded(99);
    let mut concave = true;
    let random_rho = |rng: &mut ProtocolRng| {
        let g = CMatrix::from_fn(2, 2, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let r = &g * g.adjoint();
        let tr = r.trace();
        r / tr
    };
    for _ in 0..100 {
        let k = rng.random_range(1..=4);
        let ch = random_channel(2, 2, k, &mut rng);
        let (r1, r2) = (random_rho(&mut rng), random_rho(&mut rng));
        let l: f64 = rng.random();
        let mix = &r1 * cx(l) + &r2 * cx(1.0 - l);
        let lhs = capacity_objective(&ch, &mix);
        let rhs = l * capacity_objective(&ch, &r1) + (1.0 - l) * capacity_objective(&ch, &r2);
        concave &= lhs >= rhs - 1e-9;
    }
    let (fast, time) = within(t, Duration::from_secs(120));
    let ok = (c2 - 1.0).abs() < 1e-6
        && (c3 - 3f64.log2()).abs() < 1e-6
        && (cd - 1.0).abs() < 1e-6
        && (ca - oracle).abs() < 1e-3
        && concave;
    Ok((
        ok && fast,
        format!("id2 {c2:.9}, id3 {c3:.9}, depol {cd:.9}, AD(0.5) {ca:.6} vs grid {oracle:.6}, concavity {concave}, {time}"),
    ))
}

fn ac10() -> Verdict {
    let t = Instant::now();
    let g4 = make_ghz(4, 2).map_err(err)?;
    let labels: Vec<&str> = g4.layout().labels();
    let mc_ghz = mincut_entanglement(&g4, labels[0], labels[1]).map_err(err)?.value;
    // EPR on A–C1 and C2–B
    let layout = Layout::from_pairs(&[("A", 2), ("C1", 2), ("C2", 2), ("B", 2)]).map_err(err)?;
    let mut v = CVector::zeros(16);
    for x in 0..2 {
        for y in 0..2 {
            v[layout.index(&[x, x, y, y])] = cx(0.5);
        }
    }
    let chain = PureState::new(layout, v).map_err(err)?;
    let mc_chain = mincut_entanglement(&chain, "A", "B").map_err(err)?.value;

    let psi = random_pure_state(
        Layout::from_pairs(&[("A", 2), ("B", 2), ("C", 2), ("D", 2)]).map_err(err)?,
        &mut seeded(5),
    );
    let n = 4;
    let opts = FourOptions {
        protocol: ProtocolOptions {
            n,
            trials: 100,
            seed: 5,
            ..Default::default()
        },
        chain: None,
    };
    let r = disengage_fourth(&psi, "A", "B", "C", "D", &opts).map_err(err)?;

    // density sampling: N i.i.d. codewords from q^{⊗n}, average of
    // ⊗ψ_{J_k}^A against (ψ^A)^{⊗n}
    let mut letters = vec![];
    let mut q = vec![];
    for j in 0..2 {
        // conditional state on A B C given D = j
        let amps: Vec<C64> = (0..8).map(|i| psi.amplitudes()[i * 2 + j]).collect();
        let p: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        let rho_a = CMatrix::from_fn(2, 2, |x, y| (0..4).map(|r| amps[x * 4 + r] * amps[y * 4 + r].conj()).sum::<C64>() / cx(p));
        letters.push(rho_a);
        q.push(p);
    }
    let rho_a = &letters[0] * cx(q[0]) + &letters[1] * cx(q[1]);
    let mut target = rho_a.clone();
    for _ in 1..n {
        target = target.kronecker(&rho_a);
    }
    let mut rng = seeded(77);
    let samples = 2000;
    let mut total = 0.0;
    for _ in 0..samples {
        let mut avg = CMatrix::zeros(16, 16);
        for _ in 0..r.code_size {
            let mut m = CMatrix::identity(1, 1);
            for _ in 0..n {
                let j = if rng.random::<f64>() < q[0] { 0 } else { 1 };
                m = m.kronecker(&letters[j]);
            }
            avg += m;
        }
        avg /= cx(r.code_size as f64);
        total += trace_norm(&(avg - &target));
    }
    let oracle = total / samples as f64;
    let size_check = r.code_size == four_party_code_size(n, r.chi0, 0.1, 16);
    let (fast, time) = within(t, Duration::from_secs(300));
    let ok = (mc_ghz - 1.0).abs() < 1e-10
        && mc_chain.abs() < 1e-10
        && (r.mean_marginal_distance - oracle).abs() <= 0.1
        && size_check;
    Ok((
        ok && fast,
        format!(
            "mincut GHZ4 {mc_ghz:.12}, chain {mc_chain:.1e}; N = {}, mean ‖ϑ^a − (ψ^a)^⊗4‖₁ {:.4} vs density-sampling oracle {oracle:.4}, {time}",
            r.code_size, r.mean_marginal_distance
        ),
    ))
}

fn ac11() -> Verdict {
    let t = Instant::now();
    let mut rng = seeded(21);
    let us = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
    let planted = unitary_mixture(&[0.35, 0.65], &us).map_err(err)?;
    let fit = fit_unitary_mixture(
        &planted,
        &FitOptions {
            k_terms: 2,
            restarts: 10,
            seed: 1,
            ..Default::default()
        },
    )
    .map_err(err)?;
    let ac = fit_unitary_mixture(
        &aharonov_choi(),
        &FitOptions {
            k_terms: 9,
            restarts: 10,
            seed: 1,
            ..Default::default()
        },
    )
    .map_err(err)?;
    let monotone = ac.ladder.windows(2).all(|w| w[1] <= w[0]);
    let (fast, time) = within(t, Duration::from_secs(300));
    let ok = fit.distance <= 1e-3 && ac.distance >= 0.01 && monotone;
    Ok((
        ok && fast,
        format!(
            "planted distance {:.2e}; Aharonov-Choi k≤9 distance {:.6} (ladder {}), {time}",
            fit.distance,
            ac.distance,
            ac.ladder.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(" ")
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("two-copy witness Schmidt spectrum", ac1),
        ("Aharonov state single-copy E_A", ac2),
        ("Aharonov two-copy superadditivity", ac3),
        ("W state rates", ac4),
        ("Υ family rates", ac5),
        ("POVM completeness", ac6),
        ("distillation bound", ac7),
        ("GHZ protocol fidelity", ac8),
        ("environment-assisted capacity", ac9),
        ("four-party min-cut and density sampling", ac10),
        ("unitary-mixture fitting", ac11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} AC-{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
