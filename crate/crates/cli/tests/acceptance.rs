//! Acceptance criteria 1-11, one PASS/FAIL line each.
//!
//! Criterion 5 at full scale (d up to 9, 1e5 shots per point, three sweeps)
//! takes hours on one core and runs only with SPINNET_FULL_ACCEPTANCE=1;
//! otherwise a reduced sweep is reported and the line says so. The process
//! exits non-zero when a criterion fails for a reason not listed as known.

use rand::Rng;
use spinnet::decoder::{mwpm_decode, Decoder, DetectionGraph};
use spinnet::noise_channels::*;
use spinnet::quantum_core::*;
use spinnet::rng::stream_rng;
use spinnet::shuttle_sim::*;
use spinnet::stabilizer_protocol::{
    extract_round_distribution, ghz_state, oracle_round_report, prepare_ghz, NoiseParams, StabilizerType,
};
use spinnet::surface_code::build_lattice;
use spinnet::threshold_lab::{estimate_logical_rate, locate_threshold, run_sweep, SweepParameter, ThresholdSweep};
use spinnet::timing_model::{cycle_time, OperationBudget};
use spinnet::twirling::*;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

struct Verdict {
    pass: bool,
    detail: String,
    /// why a failure is expected, when it is
    known: Option<String>,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail, known: None }
}

// 1 -------------------------------------------------------------------------

fn ghz() -> Verdict {
    let target = ghz_state();
    let mut worst = 1.0f64;
    let mut outcomes = std::collections::BTreeSet::new();
    for draws in [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]] {
        let g = prepare_ghz(draws).unwrap();
        outcomes.insert(g.outcomes);
        worst = worst.min(g.state.fidelity(&target));
    }
    verdict(
        outcomes.len() == 4 && worst >= 1.0 - 1e-12,
        format!("{} branches, min fidelity 1 - {:.1e} (need >= 1 - 1e-12)", outcomes.len(), 1.0 - worst),
    )
}

// 2 -------------------------------------------------------------------------

fn full_twirl_grouped(noise: &QuantumChannel) -> PauliChannel {
    let pc = extract_pauli_diagonal(&pauli_twirl(noise, &TwirlGateSet::full(2)).unwrap()).unwrap();
    let mut m = std::collections::BTreeMap::new();
    for (l, &p) in &pc.probabilities {
        let c: Vec<char> = l.chars().collect();
        let flip = matches!(c[1], 'Y' | 'Z');
        *m.entry(format!("{}{}", c[0], if flip { 'X' } else { 'I' })).or_insert(0.0) += p;
    }
    PauliChannel::new(2, m).unwrap()
}

fn twirl() -> Verdict {
    let tw = pauli_twirl(&QuantumChannel::unitary(swap_matrix()), &TwirlGateSet::full(2)).unwrap();
    let pc = extract_pauli_diagonal(&tw).unwrap();
    let mut swap_dev = 0.0f64;
    for p in all_paulis(2) {
        let l = p.letters_label();
        let want = if ["II", "XX", "YY", "ZZ"].contains(&l.as_str()) { 0.25 } else { 0.0 };
        swap_dev = swap_dev.max((pc.get(&l) - want).abs());
    }
    let m = ExchangeErrorModel::sqrt_swap(0.1).unwrap();
    let mut classes = std::collections::BTreeSet::new();
    let mut gadget_dev = 0.0f64;
    for t in cz_error_catalogue(&m, 0.03).unwrap() {
        if t.class == CzErrorClass::RotationPauli {
            continue;
        }
        classes.insert(format!("{:?}", t.class));
        for ch in [
            QuantumChannel::unitary(t.operator.clone()),
            QuantumChannel::mixture(2, &[(0.7, CMatrix::identity(4)), (0.3, t.operator.clone())]),
        ] {
            gadget_dev = gadget_dev.max(reduced_twirl_gadget(&ch).unwrap().max_diff(&full_twirl_grouped(&ch)));
        }
    }
    verdict(
        swap_dev < 1e-12 && gadget_dev < 1e-10 && classes.len() == 3,
        format!(
            "SWAP twirl off by {swap_dev:.1e} (< 1e-12); reduced vs full gadget off by {gadget_dev:.1e} (< 1e-10) over {} error classes",
            classes.len()
        ),
    )
}

// 3 -------------------------------------------------------------------------

fn sqrt_swap_algebra() -> Verdict {
    let mut literal = 0.0f64;
    let mut exact = 0.0f64;
    for eps in [0.01, 0.05, 0.1] {
        let m = ExchangeErrorModel::sqrt_swap(eps).unwrap();
        let ch = noisy_sqrt_swap(&m).unwrap();
        literal = literal.max(ch.distance(&sqrt_swap_decomposition(m.p_swap())));
        exact = exact.max(ch.distance(&sqrt_swap_decomposition(m.exact_swap_weight())));
    }
    let pass = literal < 1e-12;
    Verdict {
        pass,
        detail: format!("weight eps^2 off by {literal:.1e} (need < 1e-12); weight sin^2(eps) off by {exact:.1e}"),
        known: (!pass && exact < 1e-12)
            .then(|| "the exact branch weight is sin^2(eps); eps^2 is its leading term, off by eps^4/3".to_string()),
    }
}

// 4 -------------------------------------------------------------------------

fn oracle_grid() -> Verdict {
    let vals = [0.0, 1e-3, 1e-2];
    let mut worst = 0.0f64;
    let mut points = 0;
    for t in [StabilizerType::Z, StabilizerType::X] {
        for &p1 in &vals {
            for &ps in &vals {
                for &psh in &vals {
                    let n = NoiseParams::new(p1, ps, psh);
                    let o = oracle_round_report(t, &n, None, false).unwrap();
                    let e = extract_round_distribution(t, &n).unwrap();
                    worst = worst.max(o.distribution.max_diff_modulo_stabilizer(&e));
                    points += 1;
                }
            }
        }
    }
    verdict(worst < 1e-6, format!("{points} points, max entry difference {worst:.1e} (< 1e-6)"))
}

// 5 -------------------------------------------------------------------------

struct Sweep {
    name: &'static str,
    parameter: SweepParameter,
    ratio_1q: f64,
    fixed_p_swap: f64,
    grid: &'static [f64],
    window: (f64, f64),
}

const SWEEPS: [Sweep; 3] = [
    Sweep {
        name: "p_swap",
        parameter: SweepParameter::PSwap,
        ratio_1q: 0.1,
        fixed_p_swap: 0.0,
        grid: &[1e-3, 1.5e-3, 2e-3, 2.5e-3, 3e-3, 4e-3],
        window: (2.1e-3, 4.1e-3),
    },
    Sweep {
        name: "p_sh at p_swap 0.2%",
        parameter: SweepParameter::PSh,
        ratio_1q: 0.1,
        fixed_p_swap: 2e-3,
        grid: &[5e-4, 1e-3, 2e-3, 4e-3, 6e-3, 8e-3, 1e-2],
        window: (5.5e-3, 1.05e-2),
    },
    Sweep {
        name: "p_sh alone",
        parameter: SweepParameter::PSh,
        ratio_1q: 0.0,
        fixed_p_swap: 0.0,
        grid: &[1e-2, 1.4e-2, 1.8e-2, 2.2e-2, 2.6e-2, 3e-2],
        window: (1.4e-2, 2.6e-2),
    },
];

fn thresholds() -> Verdict {
    let full = std::env::var("SPINNET_FULL_ACCEPTANCE").is_ok_and(|v| v == "1");
    let (distances, shots) = if full {
        let shots = std::env::var("SPINNET_FULL_SHOTS").ok().and_then(|s| s.parse().ok()).unwrap_or(100_000u64);
        (vec![3, 5, 7, 9], shots)
    } else {
        (vec![3, 5, 7], 4000)
    };
    let mut parts = Vec::new();
    let mut all_in = true;
    for (k, s) in SWEEPS.iter().enumerate() {
        let sweep = ThresholdSweep {
            parameter: s.parameter,
            ratio_1q: s.ratio_1q,
            fixed_p_swap: s.fixed_p_swap,
            fixed_p_sh: 0.0,
            distances: distances.clone(),
            grid: s.grid.to_vec(),
            shots,
            seed: 500 + k as u64,
        };
        let rows = run_sweep(&sweep).unwrap();
        let fit = locate_threshold(&rows);
        let inside = fit.threshold.is_some_and(|t| t >= s.window.0 && t <= s.window.1);
        all_in &= inside;
        parts.push(match fit.threshold {
            Some(t) => format!(
                "{} {:.3}% in [{:.2}, {:.2}]%: {}",
                s.name,
                t * 100.0,
                s.window.0 * 100.0,
                s.window.1 * 100.0,
                if inside { "yes" } else { "no" }
            ),
            None => format!("{}: no crossing in grid", s.name),
        });
    }
    let scale = format!("d {:?}, {shots} shots/point", distances);
    if full && shots >= 100_000 {
        verdict(all_in, format!("{scale}; {}", parts.join("; ")))
    } else {
        Verdict {
            pass: false,
            detail: format!("reduced scale ({scale}); {}", parts.join("; ")),
            known: Some("full-scale run not executed; set SPINNET_FULL_ACCEPTANCE=1".into()),
        }
    }
}

// 6 -------------------------------------------------------------------------

fn ordering() -> Verdict {
    let below = NoiseParams::new(1e-4, 1e-3, 0.0);
    let above = NoiseParams::new(1e-3, 1e-2, 0.0);
    let r = |n: &NoiseParams, shots, seed| -> Vec<_> {
        [3, 5, 7].iter().map(|&d| estimate_logical_rate(d, n, shots, seed).unwrap()).collect()
    };
    let lo = r(&below, 100_000, 61);
    let hi = r(&above, 4000, 62);
    let dec = lo[1].clearly_below(&lo[0]) && lo[2].clearly_below(&lo[1]);
    let inc = hi[0].clearly_below(&hi[1]) && hi[1].clearly_below(&hi[2]);
    let fmt = |v: &[spinnet::threshold_lab::RateEstimate]| {
        v.iter().map(|e| format!("{:.2e} [{:.2e}, {:.2e}]", e.rate, e.ci_low, e.ci_high)).collect::<Vec<_>>().join(" > ")
    };
    verdict(
        dec && inc,
        format!("0.1%: {} (decreasing: {dec}); 1%: {} (increasing: {inc})", fmt(&lo), fmt(&hi).replace(" > ", " < ")),
    )
}

// 7 -------------------------------------------------------------------------

fn exhaustive(g: &DetectionGraph) -> Option<i64> {
    fn rec(g: &DetectionGraph, used: &mut Vec<bool>) -> Option<i64> {
        let Some(i) = used.iter().position(|u| !u) else { return Some(0) };
        used[i] = true;
        let mut best: Option<i64> = None;
        if let Some(b) = g.boundary[i] {
            if let Some(r) = rec(g, used) {
                best = Some(b + r);
            }
        }
        for j in i + 1..used.len() {
            if used[j] {
                continue;
            }
            let Some(w) = g.pair_weight(i, j) else { continue };
            used[j] = true;
            if let Some(r) = rec(g, used) {
                best = Some(best.map_or(w + r, |b| b.min(w + r)));
            }
            used[j] = false;
        }
        used[i] = false;
        best
    }
    rec(g, &mut vec![false; g.defects.len()])
}

fn decoder_optimality() -> Verdict {
    let l = build_lattice(3).unwrap();
    let n = NoiseParams::new(2e-3, 1e-2, 1e-2);
    let dz = extract_round_distribution(StabilizerType::Z, &n).unwrap();
    let dx = extract_round_distribution(StabilizerType::X, &n).unwrap();
    let dec = Decoder::new(&l, &dz, &dx, 3).unwrap();
    let mut rng = stream_rng(7, 0);
    let mut agree = 0;
    for case in 0..1000 {
        let kind = if case % 2 == 0 { StabilizerType::Z } else { StabilizerType::X };
        let space = dec.graph(kind);
        let k = rng.gen_range(1..=10);
        let nodes = rand::seq::index::sample(&mut rng, space.node_count(), k).into_vec();
        let g = space.detection_graph_from_nodes(nodes);
        if Some(mwpm_decode(&g).unwrap().weight) == exhaustive(&g) {
            agree += 1;
        }
    }
    verdict(agree == 1000, format!("{agree}/1000 instances with 1-10 defects equal the exhaustive minimum"))
}

// 8, 9 ----------------------------------------------------------------------

struct ShuttleResult {
    verdict: Verdict,
    /// the 4·T_th trajectory
    long: Option<ShuttleTrajectory>,
}

fn shuttle() -> ShuttleResult {
    let array = DotArray::new(&DotArraySpec::default()).unwrap();
    let base = design_sequence(&array, &[0, 1, 2], 1.0).unwrap();
    let coarse = PropagationConfig { dt_ns: 4e-6, snapshot_stride: 1 << 30, ..Default::default() };
    let fine = PropagationConfig { dt_ns: 1e-6, snapshot_stride: 2000, ..Default::default() };
    let mut drift = 0.0f64;
    let mut run = |t: f64, cfg: &PropagationConfig| {
        let tr = propagate(&array, &base.stretched(t), cfg).unwrap();
        drift = drift.max(tr.norm_drift());
        tr
    };
    // doubling scan, then bisection, at the coarse step
    let mut lo = 0.0;
    let mut hi = None;
    for t in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        if run(t, &coarse).final_fidelity() > 0.99 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let Some(mut hi) = hi else {
        return ShuttleResult { verdict: verdict(false, "F > 0.99 not reached by 32 ns".into()), long: None };
    };
    if lo > 0.0 {
        for _ in 0..4 {
            let mid = 0.5 * (lo + hi);
            if run(mid, &coarse).final_fidelity() > 0.99 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let t_th = hi;
    // reported points at the fine step
    let f_th = run(t_th, &fine).final_fidelity();
    let long = run(4.0 * t_th, &fine);
    let f_long = long.final_fidelity();
    let pass = (0.5..=20.0).contains(&t_th) && lo < t_th && f_th > 0.99 && f_long > 0.999 && drift < 1e-10;
    ShuttleResult {
        verdict: verdict(
            pass,
            format!(
                "T_th = {t_th:.3} ns (F({lo:.3}) <= 0.99), F(T_th) = {f_th:.5}, F(4 T_th) = {f_long:.6} (> 0.999), max norm drift {drift:.1e} (< 1e-10)"
            ),
        ),
        long: Some(long),
    }
}

fn stark(long: Option<&ShuttleTrajectory>) -> Verdict {
    // constant 0.16 MHz mismatch for 4 ns
    let n = 400;
    let times: Vec<f64> = (0..=n).map(|k| 4.0 * k as f64 / n as f64).collect();
    let (err, _) = mismatch_error(&times, &vec![0.16e6; n + 1], 0.0);
    let closed = (std::f64::consts::PI * 0.16e6 * 4e-9).sin().powi(2);
    let analytic_ok = ((err[n] - closed) / closed).abs() < 0.01 && ((err[n] - 4e-6) / 4e-6).abs() < 0.02;
    let Some(traj) = long else {
        return verdict(false, "no propagated trajectory".into());
    };
    let model = StarkModel { ez_ref: traj.snapshots[0].ez, ..Default::default() };
    let plain = stark_phase_error(&traj.times(), &traj.ez(), &model, model.nu0_hz);
    let comp = stark_phase_error(&traj.times(), &traj.ez(), &model, plain.nu_avg);
    let (e0, e1) = (*plain.error.last().unwrap(), *comp.error.last().unwrap());
    let reduction = if e1 > 0.0 { e0 / e1 } else { f64::INFINITY };
    verdict(
        analytic_ok && reduction >= 1e3,
        format!(
            "constant mismatch {:.4e} vs closed form {closed:.4e}; trajectory of {:.2} ns: {e0:.2e} at nu0, {e1:.2e} at nu_avg, reduction {reduction:.1e} (>= 1e3)",
            err[n],
            traj.sequence.duration()
        ),
    )
}

// 10 ------------------------------------------------------------------------

fn timing() -> Verdict {
    let b = OperationBudget::default();
    let mut targets_ok = true;
    let mut got = Vec::new();
    for (f, want) in [(100e6, 1.2e-6), (10e6, 4.2e-6), (1e6, 33.9e-6)] {
        let t = cycle_time(&b, f).unwrap();
        targets_ok &= ((t - want) / want).abs() <= 0.10;
        got.push(format!("{:.2}", t * 1e6));
    }
    let plateau = cycle_time(&b, 1e18).unwrap();
    let plateau_ok = (plateau - 4.0 * b.other_time_ns() * 1e-9).abs() < 1e-15 && (plateau - 0.9e-6).abs() < 0.1e-6;
    let grid: Vec<f64> = (0..200).map(|k| 1e5 * 10f64.powf(k as f64 * 0.03)).collect();
    let times: Vec<f64> = grid.iter().map(|&f| cycle_time(&b, f).unwrap()).collect();
    let decreasing = times.windows(2).all(|w| w[1] < w[0]);
    // R² of 1/T against f on 1-50 MHz
    let xs: Vec<f64> = (1..=50).map(|k| k as f64 * 1e6).collect();
    let ys: Vec<f64> = xs.iter().map(|&f| 1.0 / cycle_time(&b, f).unwrap()).collect();
    let mx = xs.iter().sum::<f64>() / 50.0;
    let my = ys.iter().sum::<f64>() / 50.0;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    let pass = targets_ok && plateau_ok && decreasing && r2 > 0.99;
    Verdict {
        pass,
        detail: format!(
            "({}) us at (100, 10, 1) MHz: {targets_ok}; plateau {:.3} us: {plateau_ok}; decreasing: {decreasing}; R^2 on 1-50 MHz {r2:.4} (> 0.99)",
            got.join(", "),
            plateau * 1e6
        ),
        known: (!pass && targets_ok && plateau_ok && decreasing).then(|| {
            "1/T = 2f/(16.5 + 2f T_other) bends over well before 50 MHz for any T_other that fits the cycle times".to_string()
        }),
    }
}

// 11 ------------------------------------------------------------------------

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &str, &[&str]); 5] = [
        ("ghz-verify", r#"{"ghz": {"trials": 1000}}"#, &["ghz.csv"]),
        ("round-distribution", r#"{"round_distribution": {"use_cache": false}}"#, &["round_distribution.csv"]),
        (
            "threshold",
            r#"{"seed": 3, "threshold": {"distances": [3, 5, 7], "grid": [0.002, 0.004], "shots": 2000}}"#,
            &["threshold.csv"],
        ),
        (
            "shuttle",
            r#"{"shuttle": {"durations_ns": [0.1, 0.2, 0.3], "propagation": {"dt_ns": 4e-6, "snapshot_stride": 250}}}"#,
            &["shuttle_scan.csv", "shuttle_trajectory.csv"],
        ),
        ("timing", "{}", &["timing.csv"]),
    ];
    let mut identical = 0;
    let mut total = 0;
    let mut bad = Vec::new();
    for (k, (cmd, cfg, files)) in cases.iter().enumerate() {
        let c = dir.path().join(format!("c{k}.json"));
        std::fs::write(&c, cfg).unwrap();
        let outs: Vec<_> = ["1", "4"]
            .iter()
            .map(|t| {
                let out = dir.path().join(format!("{cmd}-{t}"));
                let st = Command::new(env!("CARGO_BIN_EXE_spinnet"))
                    .args([cmd, "--config", c.to_str().unwrap(), "--threads", t, "--out", out.to_str().unwrap()])
                    .output()
                    .unwrap();
                assert!(st.status.success(), "{cmd}: {}", String::from_utf8_lossy(&st.stderr));
                out
            })
            .collect();
        for f in files.iter() {
            total += 1;
            let read = |p: &Path| std::fs::read(p.join(f)).unwrap();
            if read(&outs[0]) == read(&outs[1]) {
                identical += 1;
            } else {
                bad.push(format!("{cmd}/{f}"));
            }
        }
    }
    verdict(identical == total, format!("{identical}/{total} CSVs byte-identical at 1 and 4 threads {bad:?}"))
}

fn main() {
    let titles = [
        "GHZ preparation",
        "twirl identities",
        "sqrt-SWAP error algebra",
        "round distribution vs oracle",
        "threshold reproduction",
        "sub/above-threshold ordering",
        "decoder optimality",
        "shuttling adiabaticity",
        "Stark phase error",
        "timing model",
        "determinism",
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    let mut report = |id: usize, start: Instant, v: Verdict| {
        let status = if v.pass { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {id:>2} {status}  {}: {} [{:.1}s]", titles[id - 1], v.detail, start.elapsed().as_secs_f64());
        if let (false, Some(k)) = (v.pass, &v.known) {
            line.push_str(&format!(" (known: {k})"));
        }
        println!("{line}");
        if v.pass {
            passed += 1;
        } else if v.known.is_none() {
            unexpected += 1;
        }
    };
    let t = Instant::now();
    report(1, t, ghz());
    let t = Instant::now();
    report(2, t, twirl());
    let t = Instant::now();
    report(3, t, sqrt_swap_algebra());
    let t = Instant::now();
    report(4, t, oracle_grid());
    let t = Instant::now();
    report(5, t, thresholds());
    let t = Instant::now();
    report(6, t, ordering());
    let t = Instant::now();
    report(7, t, decoder_optimality());
    let t = Instant::now();
    let sh = shuttle();
    report(8, t, sh.verdict);
    let t = Instant::now();
    report(9, t, stark(sh.long.as_ref()));
    let t = Instant::now();
    report(10, t, timing());
    let t = Instant::now();
    report(11, t, determinism());
    println!("acceptance: {passed}/11 PASS, {unexpected} unexpected failures");
    if unexpected > 0 {
        std::process::exit(1);
    }
}
