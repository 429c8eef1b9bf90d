use super::{ProtocolError, StabilizerType};
use crate::quantum_core::Pauli;
use serde::{Deserialize, Serialize};

/// Number of (data Pauli, flip) outcomes: 4 x-bits, 4 z-bits, 1 flip bit.
pub const EFFECT_COUNT: usize = 512;

/// Packs a data Pauli (bit k of `x`/`z` is data wire k) and a flip bit.
pub fn effect_index(x: u8, z: u8, flip: bool) -> usize {
    (x as usize & 15) | ((z as usize & 15) << 4) | ((flip as usize) << 8)
}

pub fn effect_parts(e: usize) -> (u8, u8, bool) {
    ((e & 15) as u8, ((e >> 4) & 15) as u8, (e >> 8) & 1 == 1)
}

/// Four-letter label, leftmost letter on data wire A.
pub fn pauli_label(x: u8, z: u8) -> String {
    (0..4).map(|k| Pauli::from_bits((x >> k) & 1 == 1, (z >> k) & 1 == 1).to_char()).collect()
}

fn parse_label(label: &str) -> Option<(u8, u8)> {
    if label.chars().count() != 4 {
        return None;
    }
    let mut x = 0u8;
    let mut z = 0u8;
    for (k, c) in label.chars().enumerate() {
        let (bx, bz) = Pauli::from_char(c)?.bits();
        x |= (bx as u8) << k;
        z |= (bz as u8) << k;
    }
    Some((x, z))
}

/// Joint distribution of the data Pauli left by one check round and the flip
/// of the reported syndrome bit.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundErrorDistribution {
    stabilizer_type: StabilizerType,
    probs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundEntry {
    pub pauli: String,
    pub flip: bool,
    pub probability: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    stabilizer_type: StabilizerType,
    entries: Vec<RoundEntry>,
}

impl RoundErrorDistribution {
    pub fn from_dense(stabilizer_type: StabilizerType, probs: Vec<f64>) -> Result<Self, ProtocolError> {
        if probs.len() != EFFECT_COUNT {
            return Err(ProtocolError::Format(format!("expected {EFFECT_COUNT} entries, got {}", probs.len())));
        }
        let d = RoundErrorDistribution { stabilizer_type, probs };
        let defect = (d.total() - 1.0).abs();
        if defect > 1e-9 {
            return Err(ProtocolError::MassDefect(defect));
        }
        if let Some(p) = d.probs.iter().find(|p| **p < -1e-12 || p.is_nan()) {
            return Err(ProtocolError::Format(format!("negative probability {p}")));
        }
        Ok(d)
    }

    pub fn identity(stabilizer_type: StabilizerType) -> Self {
        let mut probs = vec![0.0; EFFECT_COUNT];
        probs[0] = 1.0;
        RoundErrorDistribution { stabilizer_type, probs }
    }

    /// Deterministic single outcome, for tests and fault injection.
    pub fn delta(stabilizer_type: StabilizerType, label: &str, flip: bool) -> Result<Self, ProtocolError> {
        let (x, z) = parse_label(label).ok_or_else(|| ProtocolError::Format(format!("bad label {label}")))?;
        let mut probs = vec![0.0; EFFECT_COUNT];
        probs[effect_index(x, z, flip)] = 1.0;
        Ok(RoundErrorDistribution { stabilizer_type, probs })
    }

    pub fn stabilizer_type(&self) -> StabilizerType {
        self.stabilizer_type
    }

    pub fn dense(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: &str, flip: bool) -> f64 {
        parse_label(label).map_or(0.0, |(x, z)| self.probs[effect_index(x, z, flip)])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn identity_mass(&self) -> f64 {
        self.probs[0]
    }

    /// Probability of a reported-syndrome flip.
    pub fn flip_mass(&self) -> f64 {
        self.probs[256..].iter().sum()
    }

    /// Nonzero entries in index order.
    pub fn entries(&self) -> Vec<RoundEntry> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != 0.0)
            .map(|(e, &p)| {
                let (x, z, f) = effect_parts(e);
                RoundEntry { pauli: pauli_label(x, z), flip: f, probability: p }
            })
            .collect()
    }

    /// Data Pauli of the measured stabilizer as an (x, z) mask.
    pub fn stabilizer_mask(&self) -> (u8, u8) {
        match self.stabilizer_type {
            StabilizerType::X => (15, 0),
            StabilizerType::Z => (0, 15),
        }
    }

    /// Folds `E` and `E·S` together (S the measured stabilizer); both act
    /// identically on the post-measurement state. Returns 512 entries with
    /// mass on the smaller index of each pair.
    pub fn modulo_stabilizer(&self) -> Vec<f64> {
        let (sx, sz) = self.stabilizer_mask();
        let s = effect_index(sx, sz, false);
        let mut out = vec![0.0; EFFECT_COUNT];
        for (e, &p) in self.probs.iter().enumerate() {
            out[e.min(e ^ s)] += p;
        }
        out
    }

    pub fn max_diff_modulo_stabilizer(&self, other: &RoundErrorDistribution) -> f64 {
        self.modulo_stabilizer()
            .iter()
            .zip(other.modulo_stabilizer())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &RoundErrorDistribution) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Marginal for a plaquette with some data wires absent: residues on
    /// dropped wires are discarded.
    pub fn marginalize(&self, present: [bool; 4]) -> RoundErrorDistribution {
        let keep = present.iter().enumerate().fold(0u8, |m, (k, &p)| m | ((p as u8) << k));
        let mut probs = vec![0.0; EFFECT_COUNT];
        for (e, &p) in self.probs.iter().enumerate() {
            let (x, z, f) = effect_parts(e);
            probs[effect_index(x & keep, z & keep, f)] += p;
        }
        RoundErrorDistribution { stabilizer_type: self.stabilizer_type, probs }
    }

    pub fn to_json(&self) -> String {
        let doc = Document { stabilizer_type: self.stabilizer_type, entries: self.entries() };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ProtocolError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| ProtocolError::Format(e.to_string()))?;
        let mut probs = vec![0.0; EFFECT_COUNT];
        for en in doc.entries {
            let (x, z) =
                parse_label(&en.pauli).ok_or_else(|| ProtocolError::Format(format!("bad label {}", en.pauli)))?;
            probs[effect_index(x, z, en.flip)] += en.probability;
        }
        Self::from_dense(doc.stabilizer_type, probs)
    }
}
