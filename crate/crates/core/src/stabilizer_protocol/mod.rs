//! Four-node GHZ preparation and the 10-wire stabilizer check round.
//!
//! Wire layout (little-endian qubit indices of the 10-qubit register):
//! data A..D on 0..3, ancilla-1 A..D on 4..7, ancilla-2 of A on 8 and of C
//! on 9. Singlets are loaded on (A1_A, A1_B), (A1_C, A1_D) and (A2_A, A2_C);
//! the second member of each pair is the shuttled electron.

mod distribution;
mod extract;
mod oracle;

pub use distribution::{
    effect_index, effect_parts, pauli_label, RoundEntry, RoundErrorDistribution, EFFECT_COUNT,
};
pub use extract::{extract_round_distribution, extract_round_distribution_with};
pub use oracle::{oracle_round_distribution, oracle_round_report, OracleReport};

use crate::noise_channels::{cz_sequence, CzStep, NoiseError};
use crate::quantum_core::{
    measure_pauli, GateOp, Pauli, PauliString, QuantumError, StateVector, C64, ZERO,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DATA: [usize; 4] = [0, 1, 2, 3];
pub const ANC1: [usize; 4] = [4, 5, 6, 7];
pub const ANC2: [usize; 2] = [8, 9];
pub const WIRES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Node {
    A,
    B,
    C,
    D,
}

impl Node {
    pub const ALL: [Node; 4] = [Node::A, Node::B, Node::C, Node::D];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireRole {
    Data(Node),
    Ancilla1(Node),
    Ancilla2(Node),
}

/// Role of every wire of the check circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRegister {
    roles: Vec<WireRole>,
}

impl NodeRegister {
    pub fn standard() -> Self {
        let mut roles: Vec<WireRole> = Node::ALL.iter().map(|&n| WireRole::Data(n)).collect();
        roles.extend(Node::ALL.iter().map(|&n| WireRole::Ancilla1(n)));
        roles.push(WireRole::Ancilla2(Node::A));
        roles.push(WireRole::Ancilla2(Node::C));
        NodeRegister { roles }
    }

    pub fn roles(&self) -> &[WireRole] {
        &self.roles
    }

    pub fn wire(&self, role: WireRole) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    /// (data, ancilla-1, ancilla-2) wire counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in &self.roles {
            match r {
                WireRole::Data(_) => c.0 += 1,
                WireRole::Ancilla1(_) => c.1 += 1,
                WireRole::Ancilla2(_) => c.2 += 1,
            }
        }
        c
    }

    pub fn is_valid(&self) -> bool {
        self.roles.len() == WIRES && self.counts() == (4, 4, 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StabilizerType {
    X,
    Z,
}

impl StabilizerType {
    pub fn letter(self) -> Pauli {
        match self {
            StabilizerType::X => Pauli::X,
            StabilizerType::Z => Pauli::Z,
        }
    }
}

impl std::fmt::Display for StabilizerType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter().to_char())
    }
}

/// Where the circuit-level noise is attached.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConvention {
    /// depolarizing on every ancilla right after singlet loading
    pub init_depolarizing: bool,
    /// depolarizing on a measured qubit right before its X measurement
    pub pre_measurement_depolarizing: bool,
    /// number of dephasing events per distributed singlet; the per-hop
    /// probability is chosen so the composition equals `p_sh`
    pub shuttle_hops: u32,
}

impl Default for NoiseConvention {
    fn default() -> Self {
        NoiseConvention { init_depolarizing: true, pre_measurement_depolarizing: true, shuttle_hops: 1 }
    }
}

/// Circuit noise point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub p_1q: f64,
    pub p_swap: f64,
    pub p_sh: f64,
    #[serde(default)]
    pub convention: NoiseConvention,
}

impl NoiseParams {
    pub fn new(p_1q: f64, p_swap: f64, p_sh: f64) -> Self {
        NoiseParams { p_1q, p_swap, p_sh, convention: NoiseConvention::default() }
    }

    pub fn noiseless() -> Self {
        NoiseParams::new(0.0, 0.0, 0.0)
    }

    pub fn validate(&self, max: f64) -> Result<(), ProtocolError> {
        for (name, p) in [("p_1q", self.p_1q), ("p_swap", self.p_swap), ("p_sh", self.p_sh)] {
            if !(0.0..=max).contains(&p) || p.is_nan() {
                return Err(ProtocolError::Parameter { name, value: p, max });
            }
        }
        if self.convention.shuttle_hops == 0 {
            return Err(ProtocolError::Hops);
        }
        Ok(())
    }

    /// Dephasing probability of a single hop.
    pub fn p_hop(&self) -> f64 {
        let k = self.convention.shuttle_hops.max(1) as f64;
        0.5 * (1.0 - (1.0 - 2.0 * self.p_sh).powf(1.0 / k))
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("{name} = {value} outside [0, {max}]")]
    Parameter { name: &'static str, value: f64, max: f64 },
    #[error("shuttle_hops must be at least 1")]
    Hops,
    #[error("data state must have 4 qubits, got {0}")]
    DataQubits(usize),
    #[error("probability mass defect {0:.3e}")]
    MassDefect(f64),
    #[error("distribution: {0}")]
    Format(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("twirl: {0}")]
    Twirl(String),
}

/// A deterministic SWAP appended to the noise of one data-ancilla control-Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaultInjection {
    pub node: Node,
}

/// One element of the check circuit.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Step {
    Gate(GateOp),
    Depolarize(usize),
    Dephase(usize),
    /// noisy control-Z; the second wire is the one measured next
    Gadget(usize, usize),
    MeasurePrep,
    Feedback,
    MeasureSyndrome,
}

/// Ideal check circuit with noise locations. Feedback noise lives in
/// [`feedback_steps`] and is only present on odd preparation parity.
pub(crate) fn check_circuit(stype: StabilizerType, conv: &NoiseConvention) -> Vec<Step> {
    let [a0, a1, a2, a3] = ANC1;
    let [b0, b1] = ANC2;
    let mut s = Vec::new();
    if conv.init_depolarizing {
        for q in [a0, a1, a2, a3, b0, b1] {
            s.push(Step::Depolarize(q));
        }
    }
    for q in [a1, a3, b1] {
        for _ in 0..conv.shuttle_hops {
            s.push(Step::Dephase(q));
        }
    }
    for q in [a0, a2, b0] {
        s.push(Step::Gate(GateOp::y(PI, q)));
        s.push(Step::Depolarize(q));
    }
    s.push(Step::Gadget(a0, b0));
    s.push(Step::Gadget(a2, b1));
    if conv.pre_measurement_depolarizing {
        s.push(Step::Depolarize(b0));
        s.push(Step::Depolarize(b1));
    }
    s.push(Step::MeasurePrep);
    s.push(Step::Feedback);
    let x_type = stype == StabilizerType::X;
    if x_type {
        for d in DATA {
            s.push(Step::Gate(GateOp::h(d)));
            s.push(Step::Depolarize(d));
        }
    }
    for k in 0..4 {
        s.push(Step::Gadget(DATA[k], ANC1[k]));
    }
    if x_type {
        for d in DATA {
            s.push(Step::Gate(GateOp::h(d)));
            s.push(Step::Depolarize(d));
        }
    }
    if conv.pre_measurement_depolarizing {
        for a in ANC1 {
            s.push(Step::Depolarize(a));
        }
    }
    s.push(Step::MeasureSyndrome);
    s
}

/// X_π on the ancilla-1 qubits of nodes A and B, each followed by noise.
pub(crate) fn feedback_steps() -> Vec<Step> {
    vec![
        Step::Gate(GateOp::x(PI, ANC1[0])),
        Step::Depolarize(ANC1[0]),
        Step::Gate(GateOp::x(PI, ANC1[1])),
        Step::Depolarize(ANC1[1]),
    ]
}

fn singlet_amplitudes() -> [C64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // index bit 0 is the first member: |01⟩ has index 2
    [ZERO, C64::new(-h, 0.0), C64::new(h, 0.0), ZERO]
}

/// Product of the three loaded singlets on (a0..a3, b0, b1), 6 qubits.
pub(crate) fn ancilla_singlets() -> StateVector {
    let s = singlet_amplitudes();
    let mut amps = vec![ZERO; 64];
    for (i, amp) in amps.iter_mut().enumerate() {
        let pair = |lo: usize, hi: usize| ((i >> lo) & 1) | (((i >> hi) & 1) << 1);
        *amp = s[pair(0, 1)] * s[pair(2, 3)] * s[pair(4, 5)];
    }
    StateVector::from_amplitudes(amps).expect("normalized singlets")
}

/// Contracts X-measured qubits (already in `|±⟩`) out of a state.
pub(crate) fn drop_measured(state: &StateVector, measured: &[(usize, i8)]) -> StateVector {
    let n = state.qubit_count();
    let keep: Vec<usize> = (0..n).filter(|q| !measured.iter().any(|m| m.0 == *q)).collect();
    let mut out = vec![ZERO; 1 << keep.len()];
    let amp = state.amplitudes();
    let w = std::f64::consts::FRAC_1_SQRT_2.powi(measured.len() as i32);
    for (i, a) in amp.iter().enumerate() {
        let mut sign = 1.0;
        for &(q, o) in measured {
            if o < 0 && (i >> q) & 1 == 1 {
                sign = -sign;
            }
        }
        let r = keep.iter().enumerate().fold(0usize, |acc, (j, &q)| acc | (((i >> q) & 1) << j));
        out[r] += a * (sign * w);
    }
    let mut s = StateVector::from_amplitudes(out).expect("power-of-two length");
    s.normalize();
    s
}

fn x_on(n: usize, q: usize) -> PauliString {
    PauliString::single(n, q, Pauli::X)
}

/// Result of the noiseless GHZ preparation.
#[derive(Clone, Debug)]
pub struct GhzOutcome {
    /// X outcomes of the ancilla-2 qubits of nodes A and C
    pub outcomes: [i8; 2],
    pub odd: bool,
    /// ancilla-1 state before feedback
    pub before_feedback: StateVector,
    /// ancilla-1 state after feedback
    pub state: StateVector,
}

/// GHZ state `(|0000⟩+|1111⟩)/√2` on ancilla-1 qubits A..D.
pub fn ghz_state() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; 16];
    amps[0] = C64::new(h, 0.0);
    amps[15] = C64::new(h, 0.0);
    StateVector::from_amplitudes(amps).unwrap()
}

/// Noiseless preparation of the ancilla-1 GHZ state. The two draws select the
/// X outcomes of the ancilla-2 qubits (`+1` when the draw is below `P(+1)`).
pub fn prepare_ghz(draws: [f64; 2]) -> Result<GhzOutcome, ProtocolError> {
    // local layout: a0..a3 = 0..3, b0 = 4, b1 = 5
    let mut psi = ancilla_singlets();
    for q in [0, 2, 4] {
        psi.apply_matrix(&GateOp::y(PI, q).matrix(), &[q])?;
    }
    let cz = GateOp::cz(0, 1).matrix();
    psi.apply_matrix(&cz, &[0, 4])?;
    psi.apply_matrix(&cz, &[2, 5])?;
    let (m0, psi) = measure_pauli(&psi, &x_on(6, 4), draws[0])?;
    let (m1, psi) = measure_pauli(&psi, &x_on(6, 5), draws[1])?;
    let before = drop_measured(&psi, &[(4, m0), (5, m1)]);
    let odd = m0 != m1;
    let mut after = before.clone();
    if odd {
        for q in [0, 1] {
            after.apply_matrix(&GateOp::x(PI, q).matrix(), &[q])?;
        }
    }
    Ok(GhzOutcome { outcomes: [m0, m1], odd, before_feedback: before, state: after })
}

/// Probabilities of the four (A, C) outcome branches, in the order
/// `(+,+), (+,-), (-,+), (-,-)`.
pub fn ghz_branch_probabilities() -> Result<[f64; 4], ProtocolError> {
    let mut psi = ancilla_singlets();
    for q in [0, 2, 4] {
        psi.apply_matrix(&GateOp::y(PI, q).matrix(), &[q])?;
    }
    let cz = GateOp::cz(0, 1).matrix();
    psi.apply_matrix(&cz, &[0, 4])?;
    psi.apply_matrix(&cz, &[2, 5])?;
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        let (s0, s1) = (if k & 2 == 0 { 1.0 } else { -1.0 }, if k & 1 == 0 { 1.0 } else { -1.0 });
        let mut p = 0.0;
        let a = psi.amplitudes();
        // project onto |s0⟩_4 |s1⟩_5 and take the norm of the remainder
        for r in 0..16 {
            let mut acc = ZERO;
            for b in 0..4 {
                let sg = (if b & 1 == 1 { s0 } else { 1.0 }) * (if b & 2 == 2 { s1 } else { 1.0 });
                acc += a[r | (b << 4)] * (sg * 0.5);
            }
            p += acc.norm_sqr();
        }
        *o = p;
    }
    Ok(out)
}

fn sample_pauli<R: Rng>(rng: &mut R, p: f64) -> Option<Pauli> {
    if p <= 0.0 {
        return None;
    }
    let u: f64 = rng.gen();
    if u >= p {
        return None;
    }
    Some([Pauli::X, Pauli::Y, Pauli::Z][((u / p) * 3.0).min(2.0) as usize])
}

fn apply_letter(psi: &mut StateVector, q: usize, l: Pauli) -> Result<(), QuantumError> {
    psi.apply_matrix(&l.matrix(), &[q])
}

/// Physical noisy control-Z with a random reduced twirl: the pre-gate `Z₁X₂`
/// and post-gate `X₂` are applied with probability ½.
fn trajectory_cz<R: Rng>(
    psi: &mut StateVector,
    q1: usize,
    q2: usize,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<(), QuantumError> {
    let twirl = rng.gen::<bool>();
    if twirl {
        apply_letter(psi, q1, Pauli::Z)?;
        apply_letter(psi, q2, Pauli::X)?;
    }
    let map = [q1, q2];
    for step in cz_sequence() {
        match step {
            CzStep::Gate(g) => {
                let t: Vec<usize> = g.targets.iter().map(|&t| map[t]).collect();
                psi.apply_matrix(&g.matrix(), &t)?;
            }
            CzStep::Depolarize(q) => {
                if let Some(l) = sample_pauli(rng, noise.p_1q) {
                    apply_letter(psi, map[q], l)?;
                }
            }
            CzStep::SwapError => {
                if noise.p_swap > 0.0 && rng.gen::<f64>() < noise.p_swap {
                    psi.apply_matrix(&GateOp::swap(0, 1).matrix(), &map)?;
                }
            }
        }
    }
    if twirl {
        apply_letter(psi, q2, Pauli::X)?;
    }
    Ok(())
}

fn trajectory_step<R: Rng>(
    psi: &mut StateVector,
    step: &Step,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<(), QuantumError> {
    match step {
        Step::Gate(g) => psi.apply_matrix(&g.matrix(), &g.targets),
        Step::Depolarize(q) => match sample_pauli(rng, noise.p_1q) {
            Some(l) => apply_letter(psi, *q, l),
            None => Ok(()),
        },
        Step::Dephase(q) => {
            let p = noise.p_hop();
            if p > 0.0 && rng.gen::<f64>() < p {
                apply_letter(psi, *q, Pauli::Z)?;
            }
            Ok(())
        }
        Step::Gadget(a, b) => trajectory_cz(psi, *a, *b, noise, rng),
        Step::MeasurePrep | Step::Feedback | Step::MeasureSyndrome => Ok(()),
    }
}

/// Result of one simulated check round.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    /// `+1` or `-1`
    pub syndrome: i8,
    pub prep_odd: bool,
    pub data: StateVector,
}

/// One check round on a 4-qubit data state, simulated as a 10-qubit
/// state-vector trajectory with sampled faults.
pub fn run_check_round<R: Rng>(
    data: &StateVector,
    stype: StabilizerType,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<CheckOutcome, ProtocolError> {
    if data.qubit_count() != 4 {
        return Err(ProtocolError::DataQubits(data.qubit_count()));
    }
    noise.validate(1.0)?;
    let mut psi = data.tensor(&ancilla_singlets())?;
    let mut prep = [1i8; 2];
    let mut syn = [1i8; 4];
    for step in check_circuit(stype, &noise.convention) {
        match step {
            Step::MeasurePrep => {
                for (k, &b) in ANC2.iter().enumerate() {
                    let (m, next) = measure_pauli(&psi, &x_on(WIRES, b), rng.gen())?;
                    prep[k] = m;
                    psi = next;
                }
            }
            Step::Feedback => {
                if prep[0] != prep[1] {
                    for f in feedback_steps() {
                        trajectory_step(&mut psi, &f, noise, rng)?;
                    }
                }
            }
            Step::MeasureSyndrome => {
                for (k, &a) in ANC1.iter().enumerate() {
                    let (m, next) = measure_pauli(&psi, &x_on(WIRES, a), rng.gen())?;
                    syn[k] = m;
                    psi = next;
                }
            }
            other => trajectory_step(&mut psi, &other, noise, rng)?,
        }
    }
    let measured: Vec<(usize, i8)> = ANC1
        .iter()
        .zip(syn)
        .chain(ANC2.iter().zip(prep))
        .map(|(&q, m)| (q, m))
        .collect();
    Ok(CheckOutcome {
        syndrome: syn.iter().product(),
        prep_odd: prep[0] != prep[1],
        data: drop_measured(&psi, &measured),
    })
}
