//! Stark-shifted resonance frequency and the singlet phase error it causes.

use super::{DotArray, ShuttleError, VoltageSequence};
use serde::{Deserialize, Serialize};

const PLANCK: f64 = 6.626_070_15e-34;
const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StarkModel {
    /// Δg/g = η⟨E_z⟩², (nm/V)²
    pub eta: f64,
    pub b0_tesla: f64,
    pub nu0_hz: f64,
    /// ⟨E_z⟩ at which ν = ν0, V/nm
    pub ez_ref: f64,
}

impl Default for StarkModel {
    fn default() -> Self {
        StarkModel { eta: 2.2, b0_tesla: 1.43, nu0_hz: 40e9, ez_ref: 0.0 }
    }
}

impl StarkModel {
    /// Reference g-factor so that ν(ez_ref) = ν0.
    pub fn g0(&self) -> f64 {
        PLANCK * self.nu0_hz / (BOHR_MAGNETON * self.b0_tesla * (1.0 + self.eta * self.ez_ref * self.ez_ref))
    }

    pub fn g(&self, ez: f64) -> f64 {
        self.g0() * (1.0 + self.eta * ez * ez)
    }

    /// ν − ν0, computed without forming ν.
    pub fn shift(&self, ez: f64) -> f64 {
        self.nu0_hz * self.eta * (ez * ez - self.ez_ref * self.ez_ref) / (1.0 + self.eta * self.ez_ref * self.ez_ref)
    }

    pub fn nu(&self, ez: f64) -> f64 {
        self.nu0_hz + self.shift(ez)
    }
}

/// Gaussian σ (nm) best matching, in least squares over one pitch either
/// side, the vertical field of a strip gate of the given width at the given
/// depth: (atan((x + w/2)/t) − atan((x − w/2)/t))/π.
pub fn fit_field_width(gate_width: f64, depth: f64, pitch: f64) -> f64 {
    let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * pitch / 400.0).collect();
    let strip: Vec<f64> =
        xs.iter().map(|x| (((x + gate_width / 2.0) / depth).atan() - ((x - gate_width / 2.0) / depth).atan()) / std::f64::consts::PI).collect();
    let residual = |s: f64| {
        let g: Vec<f64> = xs.iter().map(|x| (-x * x / (2.0 * s * s)).exp()).collect();
        let a = g.iter().zip(&strip).map(|(p, q)| p * q).sum::<f64>() / g.iter().map(|p| p * p).sum::<f64>();
        g.iter().zip(&strip).map(|(p, q)| (a * p - q).powi(2)).sum::<f64>()
    };
    // golden section
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.05 * pitch, 2.0 * pitch);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > 1e-9 {
        if residual(c) < residual(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

/// Ground-state ⟨E_z⟩ (V/nm) along a sequence at `samples + 1` evenly
/// spaced times: the adiabatic limit of a trajectory.
pub fn adiabatic_ez(array: &DotArray, seq: &VoltageSequence, samples: usize) -> Result<(Vec<f64>, Vec<f64>), ShuttleError> {
    let mut times = Vec::with_capacity(samples + 1);
    let mut ez = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let t = seq.duration() * k as f64 / samples as f64;
        let v = seq.at(t);
        let g = array.spectrum(&v, 1)?.states.swap_remove(0);
        let f = array.ez_field(&v);
        times.push(t);
        ez.push(g.iter().zip(&f).map(|(a, e)| a * a * e).sum());
    }
    Ok((times, ez))
}

/// Span (max − min) of ν along the adiabatic ⟨E_z⟩ of `seq`, with ν0 at
/// the initial value.
pub fn modulation_span(array: &DotArray, seq: &VoltageSequence, model: &StarkModel) -> Result<f64, ShuttleError> {
    let (_, ez) = adiabatic_ez(array, seq, 400)?;
    let m = StarkModel { ez_ref: ez[0], ..model.clone() };
    let shifts: Vec<f64> = ez.iter().map(|&e| m.shift(e)).collect();
    let hi = shifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = shifts.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

/// Field per gate volt that makes the modulation span of `seq` equal
/// `span_hz`. ⟨E_z⟩ is linear in it, so the span is a known rational
/// function of its square and the solution is closed form.
pub fn calibrate_ez_per_volt(array: &DotArray, seq: &VoltageSequence, model: &StarkModel, span_hz: f64) -> Result<f64, ShuttleError> {
    let unit = DotArray::new(&super::DotArraySpec { ez_per_volt: 1.0, ..array.spec.clone() })?;
    let (_, ez) = adiabatic_ez(&unit, seq, 400)?;
    let sq: Vec<f64> = ez.iter().map(|e| e * e).collect();
    let e0 = sq[0];
    let d = sq.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sq.iter().cloned().fold(f64::INFINITY, f64::min);
    let denom = model.eta * (model.nu0_hz * d - span_hz * e0);
    if !(denom > 0.0) {
        return Err(ShuttleError::Calibration(format!("modulation span {span_hz} Hz")));
    }
    Ok((span_hz / denom).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseError {
    /// 1 − |⟨S|ψ(t)⟩|² at each sample
    pub error: Vec<f64>,
    /// ν(t) − ν0, Hz
    pub shift: Vec<f64>,
    /// time average of ν, Hz
    pub nu_avg: f64,
}

/// Singlet infidelity from the accumulated frequency mismatch between the
/// moving spin (ν from ⟨E_z(t)⟩) and a static partner at `nu_static`.
/// Times in ns; ν is linear between samples.
pub fn stark_phase_error(times_ns: &[f64], ez: &[f64], model: &StarkModel, nu_static: f64) -> PhaseError {
    assert_eq!(times_ns.len(), ez.len());
    let shift: Vec<f64> = ez.iter().map(|&e| model.shift(e)).collect();
    let (error, mean_shift) = mismatch_error(times_ns, &shift, nu_static - model.nu0_hz);
    PhaseError { error, shift, nu_avg: model.nu0_hz + mean_shift }
}

/// sin²(π∫(Δν − offset)dt) by the trapezoid rule, and the time average of
/// Δν. Frequencies in Hz relative to a common reference, times in ns.
pub fn mismatch_error(times_ns: &[f64], shift: &[f64], offset: f64) -> (Vec<f64>, f64) {
    let mut phase = 0.0;
    let mut area = 0.0;
    let mut error = Vec::with_capacity(shift.len());
    error.push(0.0);
    for k in 1..shift.len() {
        let dt = (times_ns[k] - times_ns[k - 1]) * 1e-9;
        let mean = 0.5 * (shift[k] + shift[k - 1]);
        area += mean * dt;
        phase += (mean - offset) * dt;
        error.push((std::f64::consts::PI * phase).sin().powi(2));
    }
    let span = (times_ns[times_ns.len() - 1] - times_ns[0]) * 1e-9;
    (error, if span > 0.0 { area / span } else { shift[0] })
}

/// arcsin(√1.4e-4)·200/1.5: reproduces a 1.4e-4 error for 1.5 µm of travel
/// at a 200 µm spin-orbit length.
pub const SPIN_ORBIT_KAPPA: f64 = 1.577_658_088_975_622_2;

/// sin²(κ·travel/so_length), both lengths in µm.
pub fn spin_orbit_error_estimate(travel_um: f64, so_length_um: f64) -> f64 {
    (SPIN_ORBIT_KAPPA * travel_um / so_length_um).sin().powi(2)
}
