//! Simulation toolkit for a node/network surface-code processor built from
//! silicon spin qubits: dense protocol simulation, twirled noise models,
//! surface-code threshold Monte Carlo, single-electron shuttling dynamics
//! and cycle-time modelling.

/// Crate version, recorded in run manifests and cache keys.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod quantum_core;
pub mod noise_channels;
pub mod rng;
pub mod twirling;
pub mod stabilizer_protocol;
pub mod surface_code;
pub mod decoder;
pub mod threshold_lab;
pub mod shuttle_sim;
pub mod timing_model;

pub use quantum_core::{
    apply_gate, conjugate_pauli, measure_pauli, DensityOperator, GateKind, GateOp, Pauli,
    PauliString, QuantumError, StateVector,
};
pub use stabilizer_protocol::{NoiseParams, RoundErrorDistribution, StabilizerType};
