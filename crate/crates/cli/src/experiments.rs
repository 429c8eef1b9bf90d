//! One function per subcommand. Each writes its artifacts into `out` and
//! returns the lines to print and a summary for the manifest.

use anyhow::{bail, Context};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use spinnet::rng::stream_rng;
use spinnet::shuttle_sim::{
    design_sequence, mismatch_error, orbital_gap, propagate, spin_orbit_error_estimate, stark_phase_error, tunnel_coupling,
    DotArray, DotArraySpec, PropagationConfig, ShuttleTrajectory, StarkModel,
};
use spinnet::stabilizer_protocol::{extract_round_distribution, ghz_branch_probabilities, ghz_state, prepare_ghz};
use spinnet::threshold_lab::{locate_threshold, run_sweep};
use spinnet::timing_model::{cycle_time, log_grid, rate_table, shor_runtime, shuttle_time};
use std::path::Path;

use crate::cache::{Cache, CacheKey};
use crate::config::{ExperimentConfig, ShuttleConfig};
use crate::output::{write_csv, write_json};

pub struct Outcome {
    pub lines: Vec<String>,
    pub artifacts: Vec<String>,
    pub summary: serde_json::Value,
}

#[derive(Serialize)]
struct GhzRow {
    kind: &'static str,
    index: u64,
    outcome_a: i8,
    outcome_c: i8,
    odd: bool,
    fidelity: f64,
    exact: bool,
}

pub fn ghz_verify(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let tol = cfg.ghz.tolerance;
    let target = ghz_state();
    let row = |kind, index, draws: [f64; 2]| -> anyhow::Result<GhzRow> {
        let g = prepare_ghz(draws)?;
        let fidelity = g.state.fidelity(&target);
        Ok(GhzRow {
            kind,
            index,
            outcome_a: g.outcomes[0],
            outcome_c: g.outcomes[1],
            odd: g.odd,
            fidelity,
            exact: fidelity >= 1.0 - tol,
        })
    };
    // a draw below P(+1) = 1/2 selects +1
    let forced = [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]];
    let mut rows = forced.iter().enumerate().map(|(k, &d)| row("branch", k as u64, d)).collect::<anyhow::Result<Vec<_>>>()?;
    let seed = cfg.seed;
    let random: Vec<GhzRow> = (0..cfg.ghz.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            row("random", k, [rng.gen(), rng.gen()])
        })
        .collect::<anyhow::Result<_>>()?;
    rows.extend(random);
    write_csv(&out.join("ghz.csv"), &rows)?;
    let probs = ghz_branch_probabilities()?;
    let exact_branches = rows[..4].iter().filter(|r| r.exact).count();
    let distinct = rows[..4].iter().map(|r| (r.outcome_a, r.outcome_c)).collect::<std::collections::BTreeSet<_>>().len();
    let random_exact = rows[4..].iter().filter(|r| r.exact).count();
    let min_fidelity = rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
    let equiprobable = probs.iter().all(|p| (p - 0.25).abs() < 1e-12);
    let mut lines = vec![
        format!("{exact_branches}/4 branches exact"),
        format!("{random_exact}/{} random preparations exact, min fidelity {min_fidelity:.15}", cfg.ghz.trials),
    ];
    let ok = exact_branches == 4 && distinct == 4 && random_exact as u64 == cfg.ghz.trials && equiprobable;
    if !equiprobable {
        lines.push(format!("branch probabilities {probs:?} are not all 1/4"));
    }
    if !ok {
        bail!("GHZ verification failed: {}", lines.join("; "));
    }
    Ok(Outcome {
        lines,
        artifacts: vec!["ghz.csv".into()],
        summary: json!({
            "exact_branches": exact_branches,
            "random_exact": random_exact,
            "min_fidelity": min_fidelity,
            "branch_probabilities": probs,
        }),
    })
}

#[derive(Serialize)]
struct DistRow {
    stabilizer: String,
    pauli: String,
    flip: bool,
    probability: f64,
}

pub fn round_distribution(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let rc = &cfg.round_distribution;
    let cache = Cache::from_env(&out.join("cache"));
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut per_type = Vec::new();
    for &st in &rc.stabilizers {
        let key = CacheKey::new(&rc.noise, st);
        let compute = || Ok(extract_round_distribution(st, &rc.noise)?);
        let (dist, hit) = if rc.use_cache { cache.get_or_compute(&key, compute)? } else { (compute()?, false) };
        for e in dist.entries() {
            rows.push(DistRow { stabilizer: st.to_string(), pauli: e.pauli, flip: e.flip, probability: e.probability });
        }
        lines.push(format!(
            "{st}: identity {:.9}, syndrome flip {:.3e}, cache {}",
            dist.identity_mass(),
            dist.flip_mass(),
            if !rc.use_cache { "off" } else if hit { "hit" } else { "stored" }
        ));
        per_type.push(json!({
            "stabilizer": st,
            "identity_mass": dist.identity_mass(),
            "flip_mass": dist.flip_mass(),
            "cache_file": rc.use_cache.then(|| cache.path_for(&key)),
            "cache_hit": hit,
        }));
    }
    write_csv(&out.join("round_distribution.csv"), &rows)?;
    Ok(Outcome { lines, artifacts: vec!["round_distribution.csv".into()], summary: json!({ "distributions": per_type }) })
}

pub fn threshold(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let sweep = cfg.threshold_sweep();
    let rows = run_sweep(&sweep)?;
    let fit = locate_threshold(&rows);
    write_csv(&out.join("threshold.csv"), &rows)?;
    let summary = json!({ "sweep": sweep, "fit": fit });
    write_json(&out.join("threshold.json"), &summary)?;
    let mut lines: Vec<String> =
        fit.crossings.iter().map(|c| format!("d={} x d={}: {:.4e} ± {:.1e}", c.d_small, c.d_large, c.value, c.uncertainty)).collect();
    lines.push(match fit.threshold {
        Some(t) => format!("threshold {t:.4e} ± {:.1e}", fit.uncertainty.unwrap_or(f64::NAN)),
        None => "no crossing inside the grid".into(),
    });
    Ok(Outcome { lines, artifacts: vec!["threshold.csv".into(), "threshold.json".into()], summary })
}

fn stark_model(model: &StarkModel, from_start: bool, traj: &ShuttleTrajectory) -> StarkModel {
    if from_start {
        StarkModel { ez_ref: traj.snapshots[0].ez, ..model.clone() }
    } else {
        model.clone()
    }
}

fn simulate(spec: &DotArraySpec, path: &[usize], durations: &[f64], prop: &PropagationConfig) -> anyhow::Result<Vec<ShuttleTrajectory>> {
    let array = DotArray::new(spec)?;
    let base = design_sequence(&array, path, 1.0)?;
    durations
        .par_iter()
        .map(|&t| propagate(&array, &base.stretched(t), prop).with_context(|| format!("propagating T = {t} ns")))
        .collect()
}

fn calibration_summary(spec: &DotArraySpec) -> anyhow::Result<serde_json::Value> {
    Ok(json!({
        "orbital_gap_mev": orbital_gap(spec)?,
        "tunnel_coupling_mev": tunnel_coupling(spec)?,
        "well_depth_per_volt_mev": spec.well_depth_per_volt,
        "well_width_nm": spec.well_width_nm,
        "cross_capacitance": spec.cross_capacitance,
        "ez_per_volt": spec.ez_per_volt,
        "ez_width_nm": spec.ez_width_nm,
    }))
}

#[derive(Serialize)]
struct TrajectoryRow {
    duration_ns: f64,
    t_ns: f64,
    x_mean_nm: f64,
    x_std_nm: f64,
    fidelity: f64,
    ez_v_per_nm: f64,
    nu_hz: f64,
    phase_error: f64,
}

#[derive(Serialize)]
struct ScanRow {
    duration_ns: f64,
    final_fidelity: f64,
    norm_drift: f64,
    final_phase_error: f64,
    nu_avg_hz: f64,
}

/// Smallest duration with F above `target`, interpolated linearly in F
/// between the bracketing scan points.
fn threshold_duration(scan: &[ScanRow], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = scan.iter().map(|r| (r.duration_ns, r.final_fidelity)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = pts.iter().position(|p| p.1 > target)?;
    if k == 0 {
        return Some(pts[0].0);
    }
    let ((t0, f0), (t1, f1)) = (pts[k - 1], pts[k]);
    Some(t0 + (t1 - t0) * (target - f0) / (f1 - f0))
}

pub fn shuttle(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let s: &ShuttleConfig = &cfg.shuttle;
    let trajs = simulate(&s.array, &s.path, &s.durations_ns, &s.propagation)?;
    let mut rows = Vec::new();
    let mut scan = Vec::new();
    for (traj, &t) in trajs.iter().zip(&s.durations_ns) {
        let model = stark_model(&s.stark, s.ez_ref_from_start, traj);
        let pe = stark_phase_error(&traj.times(), &traj.ez(), &model, model.nu0_hz);
        for (k, snap) in traj.snapshots.iter().enumerate() {
            rows.push(TrajectoryRow {
                duration_ns: t,
                t_ns: snap.t_ns,
                x_mean_nm: snap.x_mean,
                x_std_nm: snap.x_std,
                fidelity: snap.fidelity,
                ez_v_per_nm: snap.ez,
                nu_hz: model.nu0_hz + pe.shift[k],
                phase_error: pe.error[k],
            });
        }
        scan.push(ScanRow {
            duration_ns: t,
            final_fidelity: traj.final_fidelity(),
            norm_drift: traj.norm_drift(),
            final_phase_error: *pe.error.last().unwrap(),
            nu_avg_hz: pe.nu_avg,
        });
    }
    write_csv(&out.join("shuttle_scan.csv"), &scan)?;
    write_csv(&out.join("shuttle_trajectory.csv"), &rows)?;
    let t_th = threshold_duration(&scan, s.fidelity_target);
    let array = DotArray::new(&s.array)?;
    let plan = design_sequence(&array, &s.path, 1.0)?;
    let summary = json!({
        "calibration": calibration_summary(&s.array)?,
        "steps_at_1ns": plan.steps,
        "fidelity_target": s.fidelity_target,
        "threshold_duration_ns": t_th,
        "scan": scan,
    });
    write_json(&out.join("shuttle.json"), &summary)?;
    let mut lines: Vec<String> =
        scan.iter().map(|r| format!("T = {:>8.3} ns  F = {:.9}  norm drift {:.1e}", r.duration_ns, r.final_fidelity, r.norm_drift)).collect();
    lines.push(match t_th {
        Some(t) => format!("F > {} from about {t:.3} ns", s.fidelity_target),
        None => format!("F > {} not reached in the scan", s.fidelity_target),
    });
    Ok(Outcome {
        lines,
        artifacts: vec!["shuttle_scan.csv".into(), "shuttle_trajectory.csv".into(), "shuttle.json".into()],
        summary,
    })
}

#[derive(Serialize)]
struct StarkRow {
    t_ns: f64,
    ez_v_per_nm: f64,
    shift_hz: f64,
    error_static_nu0: f64,
    error_static_avg: f64,
}

pub fn stark(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let s = &cfg.stark;
    let traj = simulate(&s.array, &s.path, &[s.duration_ns], &s.propagation)?.remove(0);
    let model = stark_model(&s.stark, s.ez_ref_from_start, &traj);
    let (times, ez) = (traj.times(), traj.ez());
    let plain = stark_phase_error(&times, &ez, &model, model.nu0_hz);
    let compensated = stark_phase_error(&times, &ez, &model, plain.nu_avg);
    let rows: Vec<StarkRow> = (0..times.len())
        .map(|k| StarkRow {
            t_ns: times[k],
            ez_v_per_nm: ez[k],
            shift_hz: plain.shift[k],
            error_static_nu0: plain.error[k],
            error_static_avg: compensated.error[k],
        })
        .collect();
    write_csv(&out.join("stark.csv"), &rows)?;
    let e0 = *plain.error.last().unwrap();
    let e1 = *compensated.error.last().unwrap();
    // constant mismatch, integrated numerically against the closed form
    let n = 400;
    let ct: Vec<f64> = (0..=n).map(|k| s.check_duration_ns * k as f64 / n as f64).collect();
    let (ce, _) = mismatch_error(&ct, &vec![s.check_mismatch_hz; n + 1], 0.0);
    let closed = (std::f64::consts::PI * s.check_mismatch_hz * s.check_duration_ns * 1e-9).sin().powi(2);
    let so = spin_orbit_error_estimate(s.travel_um, s.spin_orbit_length_um);
    let summary = json!({
        "duration_ns": s.duration_ns,
        "final_fidelity": traj.final_fidelity(),
        "nu0_hz": model.nu0_hz,
        "nu_avg_hz": plain.nu_avg,
        "final_error_static_nu0": e0,
        "final_error_static_avg": e1,
        "reduction": if e1 > 0.0 { e0 / e1 } else { f64::INFINITY },
        "constant_mismatch_check": { "integrated": ce[n], "closed_form": closed },
        "spin_orbit_estimate": so,
    });
    write_json(&out.join("stark.json"), &summary)?;
    let lines = vec![
        format!("error with static partner at ν0: {e0:.3e}"),
        format!("error with static partner at ν_avg = ν0 + {:.4e} Hz: {e1:.3e}", plain.nu_avg - model.nu0_hz),
        format!("constant {:.3e} Hz over {} ns: {:.6e} (closed form {closed:.6e})", s.check_mismatch_hz, s.check_duration_ns, ce[n]),
        format!("spin-orbit estimate over {} µm: {so:.3e}", s.travel_um),
    ];
    Ok(Outcome { lines, artifacts: vec!["stark.csv".into(), "stark.json".into()], summary })
}

pub fn timing(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let t = &cfg.timing;
    let b = &t.budget;
    let table = rate_table(b, &log_grid(t.f_min_hz, t.f_max_hz, t.points))?;
    write_csv(&out.join("timing.csv"), &table)?;
    let at = |f: f64| cycle_time(b, f);
    let (t1, t10, t100) = (at(1e6)?, at(10e6)?, at(100e6)?);
    let summary = json!({
        "other_time_ns": b.other_time_ns(),
        "plateau_s": b.plateau(),
        "cycle_time_s": { "1MHz": t1, "10MHz": t10, "100MHz": t100 },
        "cycles_to_factor": t.cycles_to_factor,
        "shor_days": { "10MHz": shor_runtime(t10, t.cycles_to_factor)?, "100MHz": shor_runtime(t100, t.cycles_to_factor)? },
        "internode_shuttle_ns": shuttle_time(t.internode_um, t.dot_size_nm, t.tau_ns)?,
    });
    write_json(&out.join("timing.json"), &summary)?;
    let lines = vec![
        format!("cycle time at (100, 10, 1) MHz: ({:.3}, {:.3}, {:.3}) µs", t100 * 1e6, t10 * 1e6, t1 * 1e6),
        format!("plateau {:.3} µs", b.plateau() * 1e6),
        format!(
            "factoring: {:.1} days at 10 MHz, {:.1} days at 100 MHz",
            shor_runtime(t10, t.cycles_to_factor)?,
            shor_runtime(t100, t.cycles_to_factor)?
        ),
    ];
    Ok(Outcome { lines, artifacts: vec!["timing.csv".into(), "timing.json".into()], summary })
}
