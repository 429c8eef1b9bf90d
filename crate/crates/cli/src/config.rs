//! Run configuration. Every block has defaults, so an empty `{}` is a valid
//! config; unknown keys are rejected at every level.

use serde::{Deserialize, Serialize};
use spinnet::shuttle_sim::{DotArraySpec, PropagationConfig, StarkModel};
use spinnet::threshold_lab::SweepParameter;
use spinnet::timing_model::{OperationBudget, DEFAULT_CYCLES_TO_FACTOR};
use spinnet::{NoiseParams, StabilizerType};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GhzVerify,
    RoundDistribution,
    Threshold,
    Shuttle,
    Stark,
    Timing,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GhzVerify => "ghz-verify",
            Experiment::RoundDistribution => "round-distribution",
            Experiment::Threshold => "threshold",
            Experiment::Shuttle => "shuttle",
            Experiment::Stark => "stark",
            Experiment::Timing => "timing",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// must match the subcommand when given
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
    pub ghz: GhzConfig,
    pub round_distribution: RoundDistributionConfig,
    pub threshold: ThresholdConfig,
    pub shuttle: ShuttleConfig,
    pub stark: StarkConfig,
    pub timing: TimingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: 1,
            threads: 1,
            out: PathBuf::from("spinnet-out"),
            ghz: GhzConfig::default(),
            round_distribution: RoundDistributionConfig::default(),
            threshold: ThresholdConfig::default(),
            shuttle: ShuttleConfig::default(),
            stark: StarkConfig::default(),
            timing: TimingConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhzConfig {
    /// random-outcome preparations checked on top of the four forced branches
    pub trials: u64,
    /// minimum fidelity with the target GHZ state
    pub tolerance: f64,
}

impl Default for GhzConfig {
    fn default() -> Self {
        GhzConfig { trials: 256, tolerance: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundDistributionConfig {
    pub noise: NoiseParams,
    pub stabilizers: Vec<StabilizerType>,
    pub use_cache: bool,
}

impl Default for RoundDistributionConfig {
    fn default() -> Self {
        RoundDistributionConfig {
            noise: NoiseParams::new(2e-4, 2e-3, 0.0),
            stabilizers: vec![StabilizerType::X, StabilizerType::Z],
            use_cache: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub parameter: SweepParameter,
    /// p_1q / p_swap
    pub ratio_1q: f64,
    pub fixed_p_swap: f64,
    pub fixed_p_sh: f64,
    pub distances: Vec<usize>,
    pub grid: Vec<f64>,
    pub shots: u64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            parameter: SweepParameter::PSwap,
            ratio_1q: 0.1,
            fixed_p_swap: 2e-3,
            fixed_p_sh: 0.0,
            distances: vec![3, 5, 7],
            grid: vec![1e-3, 2e-3, 3e-3, 4e-3, 5e-3],
            shots: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShuttleConfig {
    pub array: DotArraySpec,
    /// dots visited, starting where the electron is loaded
    pub path: Vec<usize>,
    /// total transfer times to simulate, ns
    pub durations_ns: Vec<f64>,
    pub propagation: PropagationConfig,
    pub stark: StarkModel,
    /// take the Stark reference field from the initial state instead of
    /// `stark.ez_ref`
    pub ez_ref_from_start: bool,
    /// fidelity that defines the threshold duration
    pub fidelity_target: f64,
}

impl Default for ShuttleConfig {
    fn default() -> Self {
        ShuttleConfig {
            array: DotArraySpec::default(),
            path: vec![0, 1, 2],
            durations_ns: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            propagation: PropagationConfig::default(),
            stark: StarkModel::default(),
            ez_ref_from_start: true,
            fidelity_target: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StarkConfig {
    pub array: DotArraySpec,
    pub path: Vec<usize>,
    pub duration_ns: f64,
    pub propagation: PropagationConfig,
    pub stark: StarkModel,
    pub ez_ref_from_start: bool,
    /// constant mismatch for the closed-form check, Hz
    pub check_mismatch_hz: f64,
    /// duration of the closed-form check, ns
    pub check_duration_ns: f64,
    /// spin-orbit estimate: travel and spin-orbit length, µm
    pub travel_um: f64,
    pub spin_orbit_length_um: f64,
}

impl Default for StarkConfig {
    fn default() -> Self {
        StarkConfig {
            array: DotArraySpec::default(),
            path: vec![0, 1, 2],
            duration_ns: 8.0,
            propagation: PropagationConfig { dt_ns: 2e-6, snapshot_stride: 500, ..Default::default() },
            stark: StarkModel::default(),
            ez_ref_from_start: true,
            check_mismatch_hz: 0.16e6,
            check_duration_ns: 4.0,
            travel_um: 1.5,
            spin_orbit_length_um: 200.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    pub budget: OperationBudget,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
    pub cycles_to_factor: f64,
    pub internode_um: f64,
    pub dot_size_nm: f64,
    pub tau_ns: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            budget: OperationBudget::default(),
            f_min_hz: 1e5,
            f_max_hz: 1e10,
            points: 51,
            cycles_to_factor: DEFAULT_CYCLES_TO_FACTOR,
            internode_um: 1.5,
            dot_size_nm: 50.0,
            tau_ns: 2.0,
        }
    }
}

/// Parses a config document; errors carry the dotted path of the key.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config { key: if key == "." { "<root>".into() } else { key }, message: inner.to_string() }
    })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config { key: "--config".into(), message: format!("{}: {e}", path.display()) })?;
    parse(&text)
}

fn bad(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config { key: key.into(), message: message.into() }
}

fn check_path(key: &str, path: &[usize], spec: &DotArraySpec) -> Result<(), CliError> {
    if path.is_empty() {
        return Err(bad(key, "path is empty"));
    }
    if let Some(p) = path.iter().find(|&&p| p >= spec.dot_count) {
        return Err(bad(key, format!("dot {p} outside a {}-dot array", spec.dot_count)));
    }
    if let Some(w) = path.windows(2).find(|w| w[0].abs_diff(w[1]) != 1) {
        return Err(bad(key, format!("step {} -> {} is not between adjacent dots", w[0], w[1])));
    }
    Ok(())
}

fn check_propagation(key: &str, p: &PropagationConfig) -> Result<(), CliError> {
    if !(p.dt_ns > 0.0) {
        return Err(bad(&format!("{key}.dt_ns"), "must be positive"));
    }
    if p.snapshot_stride == 0 {
        return Err(bad(&format!("{key}.snapshot_stride"), "must be at least 1"));
    }
    if p.refresh_steps == 0 {
        return Err(bad(&format!("{key}.refresh_steps"), "must be at least 1"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Checks the common keys and the block used by `exp`.
    pub fn validate(&self, exp: Experiment) -> Result<(), CliError> {
        if let Some(e) = self.experiment {
            if e != exp {
                return Err(bad("experiment", format!("config is for {} but {} was requested", e.name(), exp.name())));
            }
        }
        if self.threads == 0 {
            return Err(bad("threads", "must be at least 1"));
        }
        match exp {
            Experiment::GhzVerify => {
                if !(0.0..1.0).contains(&self.ghz.tolerance) {
                    return Err(bad("ghz.tolerance", "must lie in [0, 1)"));
                }
            }
            Experiment::RoundDistribution => {
                let r = &self.round_distribution;
                r.noise.validate(0.1).map_err(|e| bad("round_distribution.noise", e.to_string()))?;
                if r.stabilizers.is_empty() {
                    return Err(bad("round_distribution.stabilizers", "empty"));
                }
            }
            Experiment::Threshold => {
                let sweep = self.threshold_sweep();
                sweep.validate().map_err(|e| {
                    use spinnet::threshold_lab::LabError;
                    let key = match e {
                        LabError::TooFewShots(_) => "threshold.shots",
                        LabError::EmptySweep => "threshold.grid",
                        LabError::Surface(_) => "threshold.distances",
                        _ => "threshold.grid",
                    };
                    bad(key, e.to_string())
                })?;
                if self.threshold.distances.len() < 2 {
                    return Err(bad("threshold.distances", "need at least two distances for a crossing"));
                }
            }
            Experiment::Shuttle => {
                let s = &self.shuttle;
                s.array.validate().map_err(|e| bad("shuttle.array", e.to_string()))?;
                check_path("shuttle.path", &s.path, &s.array)?;
                check_propagation("shuttle.propagation", &s.propagation)?;
                if s.durations_ns.is_empty() || s.durations_ns.iter().any(|t| !(*t > 0.0)) {
                    return Err(bad("shuttle.durations_ns", "need one or more positive durations"));
                }
            }
            Experiment::Stark => {
                let s = &self.stark;
                s.array.validate().map_err(|e| bad("stark.array", e.to_string()))?;
                check_path("stark.path", &s.path, &s.array)?;
                check_propagation("stark.propagation", &s.propagation)?;
                if !(s.duration_ns > 0.0) {
                    return Err(bad("stark.duration_ns", "must be positive"));
                }
                if !(s.check_duration_ns > 0.0) {
                    return Err(bad("stark.check_duration_ns", "must be positive"));
                }
                if !(s.spin_orbit_length_um > 0.0) {
                    return Err(bad("stark.spin_orbit_length_um", "must be positive"));
                }
            }
            Experiment::Timing => {
                let t = &self.timing;
                t.budget.validate().map_err(|e| bad("timing.budget", e.to_string()))?;
                if !(t.f_min_hz > 0.0 && t.f_max_hz >= t.f_min_hz) {
                    return Err(bad("timing.f_min_hz", "need 0 < f_min_hz <= f_max_hz"));
                }
                if t.points == 0 {
                    return Err(bad("timing.points", "must be at least 1"));
                }
                if !(t.cycles_to_factor >= 0.0) {
                    return Err(bad("timing.cycles_to_factor", "must be non-negative"));
                }
                spinnet::timing_model::shuttle_time(t.internode_um, t.dot_size_nm, t.tau_ns)
                    .map_err(|e| bad("timing.internode_um", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn threshold_sweep(&self) -> spinnet::threshold_lab::ThresholdSweep {
        let t = &self.threshold;
        spinnet::threshold_lab::ThresholdSweep {
            parameter: t.parameter,
            ratio_1q: t.ratio_1q,
            fixed_p_swap: t.fixed_p_swap,
            fixed_p_sh: t.fixed_p_sh,
            distances: t.distances.clone(),
            grid: t.grid.clone(),
            shots: t.shots,
            seed: self.seed,
        }
    }
}
