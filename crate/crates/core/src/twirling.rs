//! Pauli twirling of channels, including the reduced `{I, X₂}` twirl of a
//! control-Z followed by an X measurement of its second qubit.
//!
//! Twirls are exact enumerations over the gate set. In the Pauli-transfer
//! picture a Pauli conjugation is a diagonal ±1 matrix, so twirling is a sign
//! average over the transfer matrix; the Kraus form is kept alongside.

use crate::noise_channels::QuantumChannel;
use crate::quantum_core::{all_paulis, CMatrix, GateOp, Pauli, PauliString, C64, ZERO};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TwirlError {
    #[error("twirl gate set is empty")]
    EmptySet,
    #[error("twirl gate set must contain the identity")]
    NoIdentity,
    #[error("arity mismatch: channel {channel}, gate {gate}")]
    Arity { channel: usize, gate: usize },
    #[error("negative Pauli weight {weight} for {label}")]
    NegativeWeight { label: String, weight: f64 },
    #[error("probabilities sum to {0}, not 1")]
    Normalization(f64),
    #[error("gadget structure violated: {0}")]
    Gadget(String),
}

/// Pauli channel `ρ → Σ_P p_P PρP`, keyed by the unsigned letter label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub arity: usize,
    pub probabilities: BTreeMap<String, f64>,
}

impl PauliChannel {
    pub fn new(arity: usize, probabilities: BTreeMap<String, f64>) -> Result<Self, TwirlError> {
        let total: f64 = probabilities.values().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(TwirlError::Normalization(total));
        }
        for (k, &v) in &probabilities {
            if v < -1e-12 {
                return Err(TwirlError::NegativeWeight { label: k.clone(), weight: v });
            }
            if k.len() != arity {
                return Err(TwirlError::Arity { channel: arity, gate: k.len() });
            }
        }
        Ok(PauliChannel { arity, probabilities })
    }

    pub fn get(&self, label: &str) -> f64 {
        self.probabilities.get(label).copied().unwrap_or(0.0)
    }

    /// Largest entrywise difference, treating missing labels as zero.
    pub fn max_diff(&self, other: &PauliChannel) -> f64 {
        self.probabilities
            .keys()
            .chain(other.probabilities.keys())
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_channel(&self) -> QuantumChannel {
        let terms: Vec<(f64, CMatrix)> = self
            .probabilities
            .iter()
            .map(|(k, &p)| (p.max(0.0), PauliString::parse(k).unwrap().to_matrix()))
            .collect();
        QuantumChannel::mixture(self.arity, &terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwirlGateSet {
    gates: Vec<PauliString>,
}

impl TwirlGateSet {
    pub fn new(gates: Vec<PauliString>) -> Result<Self, TwirlError> {
        if gates.is_empty() {
            return Err(TwirlError::EmptySet);
        }
        let n = gates[0].len();
        if let Some(g) = gates.iter().find(|g| g.len() != n) {
            return Err(TwirlError::Arity { channel: n, gate: g.len() });
        }
        if !gates.iter().any(|g| g.weight() == 0) {
            return Err(TwirlError::NoIdentity);
        }
        Ok(TwirlGateSet { gates })
    }

    /// All `4^n` Paulis.
    pub fn full(n: usize) -> Self {
        TwirlGateSet { gates: all_paulis(n) }
    }

    /// `{I, X₂}` on a qubit pair.
    pub fn reduced_cz() -> Self {
        TwirlGateSet { gates: vec![PauliString::parse("II").unwrap(), PauliString::parse("IX").unwrap()] }
    }

    pub fn gates(&self) -> &[PauliString] {
        &self.gates
    }

    pub fn arity(&self) -> usize {
        self.gates[0].len()
    }
}

/// `(1/|G|) Σ_g ĝ†∘Λ∘ĝ`.
pub fn pauli_twirl(channel: &QuantumChannel, set: &TwirlGateSet) -> Result<QuantumChannel, TwirlError> {
    if set.arity() != channel.arity() {
        return Err(TwirlError::Arity { channel: channel.arity(), gate: set.arity() });
    }
    let s = C64::new(1.0 / (set.gates.len() as f64).sqrt(), 0.0);
    let mut kraus = Vec::new();
    for g in &set.gates {
        let gm = g.to_matrix();
        let gd = gm.dagger();
        for k in channel.kraus() {
            kraus.push(gd.mul(k).mul(&gm).scale(s));
        }
    }
    Ok(QuantumChannel::new(channel.arity(), kraus).expect("arity already checked"))
}

/// Commutation sign `±1` of two Pauli strings given as base-4 indices.
fn sign(mut a: usize, mut b: usize, n: usize) -> f64 {
    let mut anti = 0;
    for _ in 0..n {
        let (pa, pb) = (Pauli::from_index(a & 3), Pauli::from_index(b & 3));
        if pa.anticommutes(pb) {
            anti += 1;
        }
        a >>= 2;
        b >>= 2;
    }
    if anti % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Twirl in the transfer representation: `R'[P][Q] = R[P][Q]·avg_g s_g(P)s_g(Q)`.
pub fn twirl_ptm(ptm: &[Vec<f64>], set: &TwirlGateSet) -> Vec<Vec<f64>> {
    let n = set.arity();
    let idx: Vec<usize> = set
        .gates
        .iter()
        .map(|g| g.letters().iter().enumerate().map(|(q, p)| p.index() << (2 * q)).sum())
        .collect();
    let m = idx.len() as f64;
    (0..ptm.len())
        .map(|p| {
            (0..ptm.len())
                .map(|q| {
                    let avg: f64 = idx.iter().map(|&g| sign(g, p, n) * sign(g, q, n)).sum::<f64>() / m;
                    ptm[p][q] * avg
                })
                .collect()
        })
        .collect()
}

/// Pauli weights of a channel: the Walsh transform of the transfer-matrix
/// diagonal, `p_P = 4^{-n} Σ_Q s(P,Q) R[Q][Q]`. Equals the channel itself
/// when the input is Pauli-diagonal.
pub fn extract_pauli_diagonal(channel: &QuantumChannel) -> Result<PauliChannel, TwirlError> {
    let n = channel.arity();
    if n > 2 {
        return Err(TwirlError::Arity { channel: n, gate: 2 });
    }
    let ptm = channel.ptm();
    let size = ptm.len();
    let paulis = all_paulis(n);
    let mut probs = BTreeMap::new();
    for (p, label) in paulis.iter().enumerate() {
        let w: f64 = (0..size).map(|q| sign(p, q, n) * ptm[q][q]).sum::<f64>() / size as f64;
        if w < -1e-10 {
            return Err(TwirlError::NegativeWeight { label: label.letters_label(), weight: w });
        }
        if w.abs() > 1e-15 {
            probs.insert(label.letters_label(), w);
        }
    }
    PauliChannel::new(n, probs)
}

/// Process matrix `χ[P][Q] = 4^{-n} Σ_K Tr(P K)·conj(Tr(Q K))`, so that
/// `Λ(ρ) = Σ χ[P][Q] P ρ Q`.
pub fn chi_matrix(channel: &QuantumChannel) -> Vec<Vec<C64>> {
    let paulis: Vec<CMatrix> = all_paulis(channel.arity()).iter().map(|p| p.to_matrix()).collect();
    let size = paulis.len();
    let mut chi = vec![vec![ZERO; size]; size];
    for k in channel.kraus() {
        let c: Vec<C64> = paulis.iter().map(|p| p.mul(k).trace()).collect();
        for a in 0..size {
            for b in 0..size {
                chi[a][b] += c[a] * c[b].conj() / size as f64;
            }
        }
    }
    chi
}

/// Effective process of a noisy gadget on (qubit 1, parity-flip bit).
#[derive(Clone, Debug)]
pub struct GadgetProcess {
    /// `eff[f][P1][Q1]`: χ-matrix on qubit 1 for flip `f`
    pub eff: [[[C64; 4]; 4]; 2],
}

impl GadgetProcess {
    /// Largest coherent (off-diagonal) term.
    pub fn max_coherence(&self) -> f64 {
        let mut m: f64 = 0.0;
        for f in 0..2 {
            for a in 0..4 {
                for b in 0..4 {
                    if a != b {
                        m = m.max(self.eff[f][a][b].norm());
                    }
                }
            }
        }
        m
    }

    /// Diagonal as a two-slot Pauli channel: letter for qubit 1, then `I`
    /// (no flip) or `X` (flip) for the parity bit.
    pub fn diagonal(&self) -> Result<PauliChannel, TwirlError> {
        let mut probs = BTreeMap::new();
        for f in 0..2 {
            for a in 0..4 {
                let w = self.eff[f][a][a].re;
                if w < -1e-10 {
                    return Err(TwirlError::NegativeWeight { label: gadget_label(a, f), weight: w });
                }
                if w.abs() > 1e-15 {
                    probs.insert(gadget_label(a, f), w);
                }
            }
        }
        PauliChannel::new(2, probs)
    }
}

pub fn gadget_label(p1: usize, flip: usize) -> String {
    format!("{}{}", Pauli::from_index(p1).to_char(), if flip == 1 { 'X' } else { 'I' })
}

/// Reduces a noise channel acting after CZ to its effect once qubit 2 is
/// measured in X with only the parity retained. Terms `P ρ Q` whose qubit-2
/// letters differ either change the recorded parity differently (removed by
/// the parity record) or differ by `X₂`, which multiplies by the forgotten
/// individual outcome and averages out.
pub fn gadget_process(noise: &QuantumChannel) -> Result<GadgetProcess, TwirlError> {
    if noise.arity() != 2 {
        return Err(TwirlError::Gadget(format!("expected a 2-qubit noise channel, got arity {}", noise.arity())));
    }
    let chi = chi_matrix(noise);
    let mut eff = [[[ZERO; 4]; 4]; 2];
    // base-4 index: qubit 1 is the low digit
    for p in 0..16 {
        for q in 0..16 {
            let (p1, p2, q1, q2) = (p & 3, p >> 2, q & 3, q >> 2);
            if p2 != q2 {
                continue;
            }
            let flip = matches!(Pauli::from_index(p2), Pauli::Y | Pauli::Z) as usize;
            eff[flip][p1][q1] += chi[p][q];
        }
    }
    Ok(GadgetProcess { eff })
}

/// Branch channel of the reduced twirl for gate `g ∈ {I, X₂}`: the pre-gate
/// is `g` pushed back through the CZ (`X₂ → Z₁X₂`), so the noise is seen as
/// `g ∘ N ∘ (CZ·pre·CZ†)`.
pub fn reduced_twirl_branch(noise: &QuantumChannel, g: &PauliString) -> QuantumChannel {
    let cz = GateOp::cz(0, 1).matrix();
    let gm = g.to_matrix();
    // pre-gate before the CZ: CZ†·g·CZ (Z₁X₂ for g = X₂)
    let pre = cz.dagger().mul(&gm).mul(&cz);
    let pushed = cz.mul(&pre).mul(&cz.dagger());
    let kraus = noise.kraus().iter().map(|k| gm.mul(k).mul(&pushed)).collect();
    QuantumChannel::new(2, kraus).unwrap()
}

/// Reduced `{I, X₂}` twirl of a CZ-plus-noise gadget terminated by an X
/// measurement of qubit 2. Returns the Pauli channel on (qubit 1, flip).
pub fn reduced_twirl_gadget(cz_noise: &QuantumChannel) -> Result<PauliChannel, TwirlError> {
    let proc = reduced_twirl_process(cz_noise)?;
    let coh = proc.max_coherence();
    if coh > 1e-10 {
        return Err(TwirlError::Gadget(format!("residual coherence {coh:.3e} on qubit 1")));
    }
    proc.diagonal()
}

/// Effective process of the reduced twirl, before checking for coherences.
pub fn reduced_twirl_process(cz_noise: &QuantumChannel) -> Result<GadgetProcess, TwirlError> {
    if cz_noise.arity() != 2 {
        return Err(TwirlError::Gadget(format!("expected arity 2, got {}", cz_noise.arity())));
    }
    let set = TwirlGateSet::reduced_cz();
    let s = C64::new(0.5f64.sqrt(), 0.0);
    let mut kraus = Vec::new();
    for g in set.gates() {
        for k in reduced_twirl_branch(cz_noise, g).kraus() {
            kraus.push(k.scale(s));
        }
    }
    gadget_process(&QuantumChannel::new(2, kraus).unwrap())
}
