//! One-dimensional single-electron shuttling through a linear gate array.
//!
//! Units: nm, meV, ns, V. The confining potential is a sum of Gaussian wells
//! whose depth is linear in the effective gate voltage (gate voltage plus a
//! nearest-neighbour cross-capacitance share). Eigenpairs come from a
//! hand-written tridiagonal solver; time evolution uses Padé approximants of
//! the propagator, each factor a complex tridiagonal solve.

pub mod eigen;
mod propagate;
mod sequence;
mod stark;

pub use propagate::{adiabaticity_metric, propagate, PropagationConfig, Scheme, ShuttleTrajectory, Snapshot};
pub use sequence::{design_sequence, StepPlan, VoltageSequence, RELEASE_PROBABILITY};
pub use stark::{adiabatic_ez, calibrate_ez_per_volt, fit_field_width, mismatch_error, modulation_span, spin_orbit_error_estimate, stark_phase_error, PhaseError, StarkModel, SPIN_ORBIT_KAPPA};

use serde::{Deserialize, Serialize};

/// ħ in meV·ns.
pub const HBAR_MEV_NS: f64 = 6.582_119_569e-4;
/// ħ²/2mₑ in meV·nm².
pub const HBAR2_OVER_2ME: f64 = 38.099_821_2;
pub const MAX_LEVELS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum ShuttleError {
    #[error("invalid array: {0}")]
    Spec(String),
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error("path step {from} -> {to} is not between adjacent dots")]
    Path { from: usize, to: usize },
    #[error("resonance not found for step {from} -> {to} within the sweep range")]
    Resonance { from: usize, to: usize },
    #[error("norm drifted by {drift:e} at t = {t_ns} ns")]
    NormDrift { drift: f64, t_ns: f64 },
    #[error("time step too coarse: dt·E_max/ħ = {0}")]
    TimeStep(f64),
    #[error("calibration did not bracket the target: {0}")]
    Calibration(String),
}

fn default_dot_count() -> usize {
    3
}

/// Gate geometry and the calibrated well model. The well parameters default
/// to the values produced by [`calibrate`] for the default geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DotArraySpec {
    #[serde(default = "default_dot_count")]
    pub dot_count: usize,
    pub gate_width_nm: f64,
    pub pitch_nm: f64,
    pub oxide_thickness_nm: f64,
    /// well depth per effective gate volt, meV/V
    pub well_depth_per_volt: f64,
    /// Gaussian σ of each well, nm
    pub well_width_nm: f64,
    /// share of each neighbouring gate's voltage seen by a dot
    pub cross_capacitance: f64,
    /// in units of mₑ
    pub effective_mass: f64,
    pub grid_spacing_nm: f64,
    /// hard walls this far beyond the outer dots
    pub margin_nm: f64,
    /// occupied-gate level
    pub v_high: f64,
    /// idle-gate level
    pub v_low: f64,
    /// vertical field per gate volt at the gate centre, V/nm per V
    pub ez_per_volt: f64,
    /// Gaussian σ of the vertical-field profile, nm
    pub ez_width_nm: f64,
}

impl Default for DotArraySpec {
    fn default() -> Self {
        DotArraySpec {
            dot_count: 3,
            gate_width_nm: 40.0,
            pitch_nm: 60.0,
            oxide_thickness_nm: 17.0,
            well_depth_per_volt: 11.878_364_642_020_3,
            well_width_nm: 20.517_700_195_312_5,
            cross_capacitance: 0.1,
            effective_mass: 0.19,
            grid_spacing_nm: 0.25,
            margin_nm: 40.0,
            v_high: 1.0,
            v_low: 0.8,
            ez_per_volt: 4.085_862_462_325_459e-3,
            ez_width_nm: 24.03,
        }
    }
}

impl DotArraySpec {
    pub fn validate(&self) -> Result<(), ShuttleError> {
        let bad = |m: &str| Err(ShuttleError::Spec(m.to_string()));
        if self.dot_count == 0 {
            return bad("dot_count must be positive");
        }
        if !(self.grid_spacing_nm > 0.0) || self.grid_spacing_nm > 1.0 {
            return bad("grid_spacing_nm must be in (0, 1] nm");
        }
        for (v, name) in [
            (self.pitch_nm, "pitch_nm"),
            (self.well_width_nm, "well_width_nm"),
            (self.effective_mass, "effective_mass"),
            (self.margin_nm, "margin_nm"),
            (self.ez_width_nm, "ez_width_nm"),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ShuttleError::Spec(format!("{name} must be positive")));
            }
        }
        if !(self.v_high > self.v_low) {
            return bad("v_high must exceed v_low");
        }
        if !(0.0..0.5).contains(&self.cross_capacitance) {
            return bad("cross_capacitance must be in [0, 0.5)");
        }
        Ok(())
    }

    /// Effective-voltage matrix: dot j sees V_j + c·(V_{j−1} + V_{j+1}).
    pub fn coupling_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dot_count;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else if i.abs_diff(j) == 1 { self.cross_capacitance } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Lowest eigenpairs of one potential.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// discrete-normalized: Σ ψ² = 1
    pub states: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

/// Eigenpairs of −ħ²/2m* d²/dx² + V on a uniform grid with hard walls just
/// outside the first and last points.
pub fn ground_spectrum(potential: &[f64], spacing_nm: f64, mass: f64, m: usize) -> Result<Spectrum, ShuttleError> {
    if m == 0 || m > MAX_LEVELS {
        return Err(ShuttleError::Eigen(format!("level count {m} outside 1..={MAX_LEVELS}")));
    }
    let t = HBAR2_OVER_2ME / mass / (spacing_nm * spacing_nm);
    let diag: Vec<f64> = potential.iter().map(|v| 2.0 * t + v).collect();
    let off = vec![-t; potential.len() - 1];
    let (energies, states) = eigen::tridiagonal_lowest(&diag, &off, m)?;
    Ok(Spectrum { energies, states })
}

/// A spec laid out on its grid.
#[derive(Clone, Debug)]
pub struct DotArray {
    pub spec: DotArraySpec,
    pub grid: Vec<f64>,
    pub centres: Vec<f64>,
    coupling: Vec<Vec<f64>>,
    wells: Vec<Vec<f64>>,
    ez_profiles: Vec<Vec<f64>>,
    /// grid ranges under each gate footprint
    footprints: Vec<std::ops::Range<usize>>,
}

impl DotArray {
    pub fn new(spec: &DotArraySpec) -> Result<Self, ShuttleError> {
        spec.validate()?;
        let centres: Vec<f64> = (0..spec.dot_count).map(|j| j as f64 * spec.pitch_nm).collect();
        let lo = -spec.margin_nm;
        let hi = centres[spec.dot_count - 1] + spec.margin_nm;
        let n = ((hi - lo) / spec.grid_spacing_nm).round() as usize + 1;
        let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * spec.grid_spacing_nm).collect();
        let gauss = |w: f64| -> Vec<Vec<f64>> {
            centres
                .iter()
                .map(|&c| grid.iter().map(|&x| (-(x - c) * (x - c) / (2.0 * w * w)).exp()).collect())
                .collect()
        };
        let wells = gauss(spec.well_width_nm);
        let ez_profiles = gauss(spec.ez_width_nm);
        let half = 0.5 * spec.gate_width_nm;
        let footprints = centres
            .iter()
            .map(|&c| grid.partition_point(|&x| x <= c - half)..grid.partition_point(|&x| x < c + half))
            .collect();
        Ok(DotArray { spec: spec.clone(), grid, centres, coupling: spec.coupling_matrix(), wells, ez_profiles, footprints })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dot_count(&self) -> usize {
        self.centres.len()
    }

    pub fn effective_voltages(&self, volts: &[f64]) -> Vec<f64> {
        self.coupling.iter().map(|row| row.iter().zip(volts).map(|(c, v)| c * v).sum()).collect()
    }

    /// V(x) in meV.
    pub fn potential(&self, volts: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.potential_into(volts, &mut out);
        out
    }

    pub fn potential_into(&self, volts: &[f64], out: &mut [f64]) {
        let eff = self.effective_voltages(volts);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (w, e) in self.wells.iter().zip(&eff) {
            let a = -self.spec.well_depth_per_volt * e;
            out.iter_mut().zip(w).for_each(|(o, g)| *o += a * g);
        }
    }

    /// ∂V/∂V_gate in meV/V.
    pub fn potential_derivative(&self, gate: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (j, w) in self.wells.iter().enumerate() {
            let a = -self.spec.well_depth_per_volt * self.coupling[j][gate];
            if a != 0.0 {
                out.iter_mut().zip(w).for_each(|(o, g)| *o += a * g);
            }
        }
        out
    }

    /// E_z(x) in V/nm.
    pub fn ez_field(&self, volts: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (p, v) in self.ez_profiles.iter().zip(volts) {
            let a = self.spec.ez_per_volt * v;
            out.iter_mut().zip(p).for_each(|(o, g)| *o += a * g);
        }
        out
    }

    pub fn spectrum(&self, volts: &[f64], m: usize) -> Result<Spectrum, ShuttleError> {
        ground_spectrum(&self.potential(volts), self.spec.grid_spacing_nm, self.spec.effective_mass, m)
    }

    /// Grid range under gate j.
    pub fn dot_range(&self, j: usize) -> std::ops::Range<usize> {
        self.footprints[j].clone()
    }

    /// Probability of finding the density under gate j.
    pub fn dot_probability(&self, density: impl Fn(usize) -> f64, j: usize) -> f64 {
        self.dot_range(j).map(density).sum()
    }

    /// Ground-state occupation of each dot at the given gate voltages.
    pub fn ground_occupations(&self, volts: &[f64]) -> Result<Vec<f64>, ShuttleError> {
        let s = self.spectrum(volts, 1)?;
        let g = &s.states[0];
        Ok((0..self.dot_count()).map(|j| self.dot_probability(|i| g[i] * g[i], j)).collect())
    }
}

/// Calibrated quantities of a spec.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub well_width_nm: f64,
    pub well_depth_per_volt: f64,
    /// orbital gap of an isolated dot at v_high, meV
    pub orbital_gap_mev: f64,
    /// half the splitting of two dots at v_high, meV
    pub tunnel_coupling_mev: f64,
}

fn with_dots(spec: &DotArraySpec, n: usize) -> DotArraySpec {
    DotArraySpec { dot_count: n, ..spec.clone() }
}

/// Orbital gap of one dot alone at v_high.
pub fn orbital_gap(spec: &DotArraySpec) -> Result<f64, ShuttleError> {
    let a = DotArray::new(&with_dots(spec, 1))?;
    Ok(a.spectrum(&[spec.v_high], 2)?.gap())
}

/// ε_t of two dots, both gates at v_high.
pub fn tunnel_coupling(spec: &DotArraySpec) -> Result<f64, ShuttleError> {
    let a = DotArray::new(&with_dots(spec, 2))?;
    Ok(0.5 * a.spectrum(&[spec.v_high, spec.v_high], 2)?.gap())
}

fn bisect(mut lo: f64, mut hi: f64, iters: usize, mut above: impl FnMut(f64) -> Result<bool, ShuttleError>) -> Result<f64, ShuttleError> {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nested bisection: for each trial width, the depth is fixed by the orbital
/// gap target; the width is then fixed by the tunnel coupling target
/// (a wider well at fixed gap couples more strongly).
pub fn calibrate(spec: &DotArraySpec, gap_mev: f64, eps_t_mev: f64) -> Result<(DotArraySpec, Calibration), ShuttleError> {
    let depth_for = |width: f64| -> Result<f64, ShuttleError> {
        let trial = |depth: f64| DotArraySpec { well_width_nm: width, well_depth_per_volt: depth, ..spec.clone() };
        let (lo, hi) = (0.1, 500.0);
        if orbital_gap(&trial(hi))? < gap_mev || orbital_gap(&trial(lo))? > gap_mev {
            return Err(ShuttleError::Calibration(format!("gap {gap_mev} meV at width {width} nm")));
        }
        bisect(lo, hi, 50, |d| Ok(orbital_gap(&trial(d))? > gap_mev))
    };
    let coupling_at = |width: f64| -> Result<f64, ShuttleError> {
        let depth = depth_for(width)?;
        tunnel_coupling(&DotArraySpec { well_width_nm: width, well_depth_per_volt: depth, ..spec.clone() })
    };
    let (lo, hi) = (0.15 * spec.pitch_nm, 0.5 * spec.pitch_nm);
    if coupling_at(lo)? > eps_t_mev || coupling_at(hi)? < eps_t_mev {
        return Err(ShuttleError::Calibration(format!("tunnel coupling {eps_t_mev} meV")));
    }
    let width = bisect(lo, hi, 12, |w| Ok(coupling_at(w)? > eps_t_mev))?;
    let depth = depth_for(width)?;
    let out = DotArraySpec { well_width_nm: width, well_depth_per_volt: depth, ..spec.clone() };
    let cal = Calibration {
        well_width_nm: width,
        well_depth_per_volt: depth,
        orbital_gap_mev: orbital_gap(&out)?,
        tunnel_coupling_mev: tunnel_coupling(&out)?,
    };
    Ok((out, cal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_is_linear_in_gate_voltage() {
        let a = DotArray::new(&DotArraySpec::default()).unwrap();
        let v1 = a.potential(&[1.0, 0.8, 0.8]);
        let v2 = a.potential(&[1.0, 0.9, 0.8]);
        let d = a.potential_derivative(1);
        for i in 0..a.len() {
            assert!((v2[i] - v1[i] - 0.1 * d[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let s = DotArraySpec { grid_spacing_nm: 1.5, ..Default::default() };
        assert!(DotArray::new(&s).is_err());
    }
}
