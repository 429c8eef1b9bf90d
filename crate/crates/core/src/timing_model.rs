//! Surface-code cycle time as a function of the ESR Rabi frequency.
//!
//! A full cycle is `subcycles` stabilizer subcycles. Each subcycle spends
//! `pi_rotations_per_subcycle` π rotations at 1/(2 f_rabi) apiece plus the
//! serial non-ESR operations listed in `serial_op_counts`.

use serde::{Deserialize, Serialize};

/// Default number of cycles to factor a 2000-bit number.
pub const DEFAULT_CYCLES_TO_FACTOR: f64 = 5e11;
const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TimingError {
    #[error("{0} must be non-negative and finite")]
    Negative(&'static str),
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("a full cycle has 4 subcycles, got {0}")]
    Subcycles(u32),
}

/// Serial occurrences of each non-ESR operation in one subcycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SerialOpCounts {
    pub load: f64,
    pub shuttle: f64,
    pub sqrt_swap: f64,
    pub empty: f64,
    pub readout: f64,
}

impl Default for SerialOpCounts {
    fn default() -> Self {
        // two load+shuttle rounds (ancilla 1, then ancilla 2); √SWAPs on the
        // critical path of the two CNOT/CZ stages; ancilla 2 and ancilla 1
        // readouts each with an init and a detection window; two empties
        SerialOpCounts { load: 2.0, shuttle: 2.0, sqrt_swap: 5.0, empty: 2.0, readout: 4.0 }
    }
}

/// Operation times in ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperationBudget {
    pub t_load: f64,
    pub t_shuttle_internode: f64,
    pub t_sqrt_swap: f64,
    pub t_empty: f64,
    pub t_readout: f64,
    pub pi_rotations_per_subcycle: f64,
    pub subcycles: u32,
    pub serial_op_counts: SerialOpCounts,
}

impl Default for OperationBudget {
    fn default() -> Self {
        OperationBudget {
            t_load: 20.0,
            t_shuttle_internode: 60.0,
            t_sqrt_swap: 1.0,
            t_empty: 10.0,
            t_readout: 10.0,
            pi_rotations_per_subcycle: 16.5,
            subcycles: 4,
            serial_op_counts: SerialOpCounts::default(),
        }
    }
}

fn non_negative(x: f64, name: &'static str) -> Result<(), TimingError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(TimingError::Negative(name))
    }
}

impl OperationBudget {
    pub fn validate(&self) -> Result<(), TimingError> {
        non_negative(self.t_load, "t_load")?;
        non_negative(self.t_shuttle_internode, "t_shuttle_internode")?;
        non_negative(self.t_sqrt_swap, "t_sqrt_swap")?;
        non_negative(self.t_empty, "t_empty")?;
        non_negative(self.t_readout, "t_readout")?;
        non_negative(self.pi_rotations_per_subcycle, "pi_rotations_per_subcycle")?;
        let c = &self.serial_op_counts;
        non_negative(c.load, "serial_op_counts.load")?;
        non_negative(c.shuttle, "serial_op_counts.shuttle")?;
        non_negative(c.sqrt_swap, "serial_op_counts.sqrt_swap")?;
        non_negative(c.empty, "serial_op_counts.empty")?;
        non_negative(c.readout, "serial_op_counts.readout")?;
        if self.subcycles != 4 {
            return Err(TimingError::Subcycles(self.subcycles));
        }
        Ok(())
    }

    /// Serial non-ESR time per subcycle, ns.
    pub fn other_time_ns(&self) -> f64 {
        let c = &self.serial_op_counts;
        c.load * self.t_load
            + c.shuttle * self.t_shuttle_internode
            + c.sqrt_swap * self.t_sqrt_swap
            + c.empty * self.t_empty
            + c.readout * self.t_readout
    }

    /// Cycle time in the limit of infinitely fast ESR, seconds.
    pub fn plateau(&self) -> f64 {
        self.subcycles as f64 * self.other_time_ns() * 1e-9
    }
}

/// Full cycle time in seconds for a Rabi frequency in Hz.
pub fn cycle_time(budget: &OperationBudget, f_rabi: f64) -> Result<f64, TimingError> {
    budget.validate()?;
    if !(f_rabi > 0.0 && f_rabi.is_finite()) {
        return Err(TimingError::NonPositive("f_rabi"));
    }
    let esr = budget.pi_rotations_per_subcycle / (2.0 * f_rabi);
    Ok(budget.subcycles as f64 * (esr + budget.other_time_ns() * 1e-9))
}

/// Internode singlet distribution time (L/D)·τ in ns, for L in µm and D in nm.
pub fn shuttle_time(l_um: f64, d_nm: f64, tau_ns: f64) -> Result<f64, TimingError> {
    if !(l_um > 0.0 && l_um.is_finite()) {
        return Err(TimingError::NonPositive("L"));
    }
    if !(d_nm > 0.0 && d_nm.is_finite()) {
        return Err(TimingError::NonPositive("D"));
    }
    non_negative(tau_ns, "tau")?;
    Ok(l_um * 1e3 / d_nm * tau_ns)
}

/// Runtime in days of `cycles` cycles of `cycle_time` seconds each.
pub fn shor_runtime(cycle_time: f64, cycles: f64) -> Result<f64, TimingError> {
    non_negative(cycle_time, "cycle_time")?;
    non_negative(cycles, "cycles_to_factor")?;
    Ok(cycle_time * cycles / SECONDS_PER_DAY)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub f_rabi_hz: f64,
    pub cycle_time_s: f64,
    pub cycle_rate_hz: f64,
}

/// Cycle time and rate at each Rabi frequency.
pub fn rate_table(budget: &OperationBudget, f_rabi: &[f64]) -> Result<Vec<RatePoint>, TimingError> {
    f_rabi
        .iter()
        .map(|&f| {
            let t = cycle_time(budget, f)?;
            Ok(RatePoint { f_rabi_hz: f, cycle_time_s: t, cycle_rate_hz: 1.0 / t })
        })
        .collect()
}

/// `n` log-spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect(),
    }
}
