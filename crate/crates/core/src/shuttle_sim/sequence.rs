//! Gate-voltage sequences for dot-to-dot transfers.
//!
//! Each step j → k has four segments: raise V_k until the ground state puts
//! `RELEASE_PROBABILITY` in dot k, raise it on to the resonance (equal
//! occupation of j and k), lower V_j until dot j holds `RELEASE_PROBABILITY`,
//! then lower V_j to idle. Each segment is a linear ramp whose speed is set
//! so that every segment reaches the same peak adiabaticity metric; the
//! ramps through the anticrossing come out slow, the others fast.

use super::{DotArray, ShuttleError, HBAR_MEV_NS};
use serde::Serialize;

pub const RELEASE_PROBABILITY: f64 = 1e-3;
const SAMPLES_PER_SEGMENT: usize = 64;
const LEVELS: usize = 4;

/// Voltages found while designing one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepPlan {
    pub from: usize,
    pub to: usize,
    /// receiving gate at the 0.1% point
    pub approach: f64,
    /// receiving gate at equal occupation
    pub resonance: f64,
    /// sending gate at the 0.1% point
    pub release: f64,
    /// time spent in each segment, ns
    pub durations: [f64; 4],
}

/// Piecewise-linear gate voltages. `times` in ns, ascending from 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VoltageSequence {
    pub times: Vec<f64>,
    pub volts: Vec<Vec<f64>>,
    pub steps: Vec<StepPlan>,
}

impl VoltageSequence {
    /// Constant voltages for `duration` ns.
    pub fn hold(volts: Vec<f64>, duration: f64) -> Self {
        VoltageSequence { times: vec![0.0, duration], volts: vec![volts.clone(), volts], steps: Vec::new() }
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().expect("non-empty sequence")
    }

    pub fn gate_count(&self) -> usize {
        self.volts[0].len()
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.gate_count()];
        self.at_into(t, &mut out);
        out
    }

    pub fn at_into(&self, t: f64, out: &mut [f64]) {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            out.copy_from_slice(&self.volts[0]);
        } else if k >= self.times.len() {
            out.copy_from_slice(self.volts.last().unwrap());
        } else {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
            for (g, o) in out.iter_mut().enumerate() {
                *o = self.volts[k - 1][g] + f * (self.volts[k][g] - self.volts[k - 1][g]);
            }
        }
    }

    /// Rescales time to a new total duration.
    pub fn stretched(&self, duration: f64) -> Self {
        let f = duration / self.duration();
        let mut s = self.clone();
        s.times.iter_mut().for_each(|t| *t *= f);
        for st in &mut s.steps {
            st.durations.iter_mut().for_each(|d| *d *= f);
        }
        s
    }
}

/// ħ Σ_{m≠g} |⟨ψ_m|∂H/∂V_gate|ψ_g⟩| / (E_m − E_g)², in ns/V: the
/// adiabaticity metric per unit sweep rate.
fn sweep_sensitivity(array: &DotArray, volts: &[f64], gate: usize) -> Result<f64, ShuttleError> {
    let s = array.spectrum(volts, LEVELS)?;
    let dv = array.potential_derivative(gate);
    let g = &s.states[0];
    let mut total = 0.0;
    for m in 1..LEVELS {
        let gap = s.energies[m] - s.energies[0];
        if gap.abs() < 1e-12 {
            continue;
        }
        let me: f64 = s.states[m].iter().zip(g).zip(&dv).map(|((a, b), d)| a * b * d).sum();
        total += me.abs() / (gap * gap);
    }
    Ok(HBAR_MEV_NS * total)
}

/// Finds the gate value where `occ(v)` crosses `target`, with `occ`
/// increasing in v on [lo, hi].
fn crossing(lo: f64, hi: f64, target: f64, mut occ: impl FnMut(f64) -> Result<f64, ShuttleError>) -> Result<Option<f64>, ShuttleError> {
    let (mut a, mut b) = (lo, hi);
    if occ(a)? >= target {
        return Ok(Some(a));
    }
    if occ(b)? < target {
        return Ok(None);
    }
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if occ(m)? >= target {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

struct Segment {
    gate: usize,
    from: f64,
    to: f64,
    /// voltages of the other gates
    base: Vec<f64>,
    /// knots cluster towards this end of the sweep
    dense_at_end: bool,
}

/// Designs a transfer along `path` lasting `duration` ns. Gates start at
/// v_high on `path[0]` and v_low elsewhere.
pub fn design_sequence(array: &DotArray, path: &[usize], duration: f64) -> Result<VoltageSequence, ShuttleError> {
    let spec = &array.spec;
    let n = array.dot_count();
    if path.is_empty() || path.iter().any(|&p| p >= n) {
        return Err(ShuttleError::Spec("path indices outside the array".into()));
    }
    if !(duration > 0.0) {
        return Err(ShuttleError::Spec("duration must be positive".into()));
    }
    for w in path.windows(2) {
        if w[0].abs_diff(w[1]) != 1 {
            return Err(ShuttleError::Path { from: w[0], to: w[1] });
        }
    }
    let mut volts = vec![spec.v_low; n];
    volts[path[0]] = spec.v_high;
    let span = spec.v_high - spec.v_low;
    let mut segments: Vec<Segment> = Vec::new();
    let mut plans = Vec::new();
    for w in path.windows(2) {
        let (j, k) = (w[0], w[1]);
        let occupation = |v: &[f64], dot: usize| Ok(array.ground_occupations(v)?[dot]);
        // occupation of k minus occupation of j
        let imbalance = |v: &[f64]| -> Result<f64, ShuttleError> {
            let o = array.ground_occupations(v)?;
            Ok(o[k] - o[j])
        };
        let at = |gate: usize, x: f64, v: &[f64]| {
            let mut u = v.to_vec();
            u[gate] = x;
            u
        };
        let top = volts[j] + span;
        let approach = crossing(spec.v_low, top, RELEASE_PROBABILITY, |x| occupation(&at(k, x, &volts), k))?
            .ok_or(ShuttleError::Resonance { from: j, to: k })?;
        let resonance =
            crossing(approach, top, 0.0, |x| imbalance(&at(k, x, &volts)))?.ok_or(ShuttleError::Resonance { from: j, to: k })?;
        let held = at(k, resonance, &volts);
        // lowering V_j drains dot j; bisect on −V_j
        let release = crossing(-volts[j], -(volts[j] - span), -RELEASE_PROBABILITY, |x| Ok(-occupation(&at(j, -x, &held), j)?))?
            .map(|x| -x)
            .ok_or(ShuttleError::Resonance { from: j, to: k })?;
        segments.push(Segment { gate: k, from: spec.v_low, to: approach, base: volts.clone(), dense_at_end: true });
        segments.push(Segment { gate: k, from: approach, to: resonance, base: volts.clone(), dense_at_end: true });
        segments.push(Segment { gate: j, from: volts[j], to: release, base: held.clone(), dense_at_end: false });
        segments.push(Segment { gate: j, from: release, to: spec.v_low, base: held.clone(), dense_at_end: false });
        plans.push(StepPlan { from: j, to: k, approach, resonance, release, durations: [0.0; 4] });
        volts = at(j, spec.v_low, &held);
    }
    if segments.is_empty() {
        return Ok(VoltageSequence::hold(volts, duration));
    }
    // each segment is one linear ramp; its duration is set so the peak of
    // the adiabaticity metric is the same in every segment
    let mut knots: Vec<Vec<f64>> = Vec::with_capacity(segments.len() + 1);
    let mut cost: Vec<f64> = Vec::with_capacity(segments.len());
    let mut start = vec![spec.v_low; n];
    start[path[0]] = spec.v_high;
    knots.push(start);
    for seg in &segments {
        let mut peak = 0.0f64;
        for q in 0..=SAMPLES_PER_SEGMENT {
            let s = q as f64 / SAMPLES_PER_SEGMENT as f64;
            // quadratic clustering towards the near-degenerate end
            let f = if seg.dense_at_end { 1.0 - (1.0 - s) * (1.0 - s) } else { s * s };
            let mut u = seg.base.clone();
            u[seg.gate] = seg.from + f * (seg.to - seg.from);
            peak = peak.max(sweep_sensitivity(array, &u, seg.gate)?);
        }
        cost.push(peak * (seg.to - seg.from).abs());
        let mut u = seg.base.clone();
        u[seg.gate] = seg.to;
        knots.push(u);
    }
    let total: f64 = cost.iter().sum();
    let mut times = Vec::with_capacity(knots.len());
    times.push(0.0);
    let mut t = 0.0;
    for (si, c) in cost.iter().enumerate() {
        let dt = duration * c / total;
        t += dt;
        times.push(t);
        plans[si / 4].durations[si % 4] = dt;
    }
    *times.last_mut().unwrap() = duration;
    Ok(VoltageSequence { times, volts: knots, steps: plans })
}
