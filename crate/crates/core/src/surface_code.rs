//! Planar surface code on the node network, the four-subcycle plaquette
//! schedule and Pauli-frame sampling of noisy syndrome histories.
//!
//! Layout: a `(2d−1)×(2d−1)` grid. Data qubits sit at `(r, c)` with `r + c`
//! even; plaquettes at `r + c` odd, X-type on even rows and Z-type on odd
//! rows. Logical Z is Z along row 0, logical X is X along column 0. A
//! plaquette's node slots are A = north, B = west, C = east, D = south.
//!
//! Subcycles: 1 and 2 measure the Z plaquettes of the two checkerboard
//! colours of the plaquette grid, 3 and 4 the X plaquettes likewise.

use crate::quantum_core::{Pauli, PauliString};
use crate::stabilizer_protocol::{effect_parts, RoundErrorDistribution, StabilizerType};
use rand::Rng;
use rand_distr::{Distribution, WeightedAliasIndex};
use serde::Serialize;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("code distance {0} must be odd and in [3, 15]")]
    Distance(usize),
    #[error("distribution for {expected} plaquettes has type {got}")]
    DistributionType { expected: StabilizerType, got: StabilizerType },
    #[error("frame is outside the codespace ({0} violated stabilizers)")]
    NotCodespace(usize),
    #[error("alias table: {0}")]
    Alias(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Plaquette {
    pub kind: StabilizerType,
    pub site: (usize, usize),
    /// data qubit index per node slot A..D (north, west, east, south)
    pub slots: [Option<usize>; 4],
    /// 1..=4
    pub subcycle: u8,
}

impl Plaquette {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().flatten().copied()
    }

    pub fn weight(&self) -> usize {
        self.support().count()
    }

    pub fn present(&self) -> [bool; 4] {
        self.slots.map(|s| s.is_some())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeLattice {
    pub distance: usize,
    pub data_sites: Vec<(usize, usize)>,
    /// sorted by site (row, column)
    pub plaquettes: Vec<Plaquette>,
    /// data qubits carrying Z in logical Z
    pub logical_z: Vec<usize>,
    /// data qubits carrying X in logical X
    pub logical_x: Vec<usize>,
}

pub fn build_lattice(d: usize) -> Result<CodeLattice, SurfaceError> {
    if d % 2 == 0 || !(3..=15).contains(&d) {
        return Err(SurfaceError::Distance(d));
    }
    let n = 2 * d - 1;
    let mut index = vec![usize::MAX; n * n];
    let mut data_sites = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if (r + c) % 2 == 0 {
                index[r * n + c] = data_sites.len();
                data_sites.push((r, c));
            }
        }
    }
    let at = |r: isize, c: isize| -> Option<usize> {
        if r < 0 || c < 0 || r >= n as isize || c >= n as isize {
            None
        } else {
            Some(index[r as usize * n + c as usize])
        }
    };
    let mut plaquettes = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if (r + c) % 2 == 0 {
                continue;
            }
            let (ri, ci) = (r as isize, c as isize);
            let slots = [at(ri - 1, ci), at(ri, ci - 1), at(ri, ci + 1), at(ri + 1, ci)];
            let (kind, colour) = if r % 2 == 0 {
                (StabilizerType::X, (r / 2 + (c - 1) / 2) % 2)
            } else {
                (StabilizerType::Z, ((r - 1) / 2 + c / 2) % 2)
            };
            let subcycle = match kind {
                StabilizerType::Z => 1 + colour as u8,
                StabilizerType::X => 3 + colour as u8,
            };
            plaquettes.push(Plaquette { kind, site: (r, c), slots, subcycle });
        }
    }
    let logical_z = (0..n).step_by(2).map(|c| index[c]).collect();
    let logical_x = (0..n).step_by(2).map(|r| index[r * n]).collect();
    Ok(CodeLattice { distance: d, data_sites, plaquettes, logical_z, logical_x })
}

impl CodeLattice {
    pub fn data_count(&self) -> usize {
        self.data_sites.len()
    }

    pub fn plaquettes_of(&self, kind: StabilizerType) -> Vec<usize> {
        (0..self.plaquettes.len()).filter(|&i| self.plaquettes[i].kind == kind).collect()
    }

    pub fn plaquette_pauli(&self, i: usize) -> PauliString {
        let p = &self.plaquettes[i];
        let mut letters = vec![Pauli::I; self.data_count()];
        for q in p.support() {
            letters[q] = p.kind.letter();
        }
        PauliString::from_letters(letters)
    }

    pub fn logical_z_pauli(&self) -> PauliString {
        let mut letters = vec![Pauli::I; self.data_count()];
        for &q in &self.logical_z {
            letters[q] = Pauli::Z;
        }
        PauliString::from_letters(letters)
    }

    pub fn logical_x_pauli(&self) -> PauliString {
        let mut letters = vec![Pauli::I; self.data_count()];
        for &q in &self.logical_x {
            letters[q] = Pauli::X;
        }
        PauliString::from_letters(letters)
    }

    /// No data qubit is touched twice within any subcycle.
    pub fn schedule_is_valid(&self) -> bool {
        for sc in 1..=4u8 {
            let mut used = vec![false; self.data_count()];
            for p in self.plaquettes.iter().filter(|p| p.subcycle == sc) {
                for q in p.support() {
                    if used[q] {
                        return false;
                    }
                    used[q] = true;
                }
            }
        }
        true
    }

    /// Syndrome bit of every plaquette for a frame.
    pub fn syndrome(&self, frame: &PauliFrame) -> Vec<u8> {
        self.plaquettes.iter().map(|p| frame.detects(p) as u8).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Pauli error on the data qubits as x/z bit sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        let w = n.div_ceil(64);
        PauliFrame { n, x: vec![0; w], z: vec![0; w] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn x(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn flip_x(&mut self, q: usize) {
        self.x[q / 64] ^= 1 << (q % 64);
    }

    pub fn flip_z(&mut self, q: usize) {
        self.z[q / 64] ^= 1 << (q % 64);
    }

    pub fn apply(&mut self, q: usize, p: Pauli) {
        let (bx, bz) = p.bits();
        if bx {
            self.flip_x(q);
        }
        if bz {
            self.flip_z(q);
        }
    }

    /// Frame composition is XOR.
    pub fn compose(&self, other: &PauliFrame) -> PauliFrame {
        PauliFrame {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn from_pauli(p: &PauliString) -> PauliFrame {
        let mut f = PauliFrame::new(p.len());
        for (q, &l) in p.letters().iter().enumerate() {
            f.apply(q, l);
        }
        f
    }

    pub fn to_pauli(&self) -> PauliString {
        PauliString::from_letters((0..self.n).map(|q| Pauli::from_bits(self.x(q), self.z(q))).collect())
    }

    /// Whether the frame anticommutes with the plaquette.
    pub fn detects(&self, p: &Plaquette) -> bool {
        let mut par = false;
        for q in p.support() {
            par ^= match p.kind {
                StabilizerType::X => self.z(q),
                StabilizerType::Z => self.x(q),
            };
        }
        par
    }
}

/// Measurement outcomes `[round][plaquette]`; the last round is noiseless.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub rounds: usize,
    pub plaquettes: usize,
    bits: Vec<u8>,
}

impl SyndromeRecord {
    pub fn new(rounds: usize, plaquettes: usize) -> Self {
        SyndromeRecord { rounds, plaquettes, bits: vec![0; rounds * plaquettes] }
    }

    pub fn get(&self, round: usize, plaquette: usize) -> u8 {
        self.bits[round * self.plaquettes + plaquette]
    }

    pub fn set(&mut self, round: usize, plaquette: usize, v: u8) {
        self.bits[round * self.plaquettes + plaquette] = v;
    }

    pub fn round(&self, r: usize) -> &[u8] {
        &self.bits[r * self.plaquettes..(r + 1) * self.plaquettes]
    }

    pub fn is_trivial(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }
}

struct Table {
    alias: WeightedAliasIndex<f64>,
    effects: Vec<usize>,
}

impl Table {
    fn new(dist: &RoundErrorDistribution) -> Result<Self, SurfaceError> {
        let (effects, weights): (Vec<usize>, Vec<f64>) =
            dist.dense().iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(e, &p)| (e, p)).unzip();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| SurfaceError::Alias(e.to_string()))?;
        Ok(Table { alias, effects })
    }
}

fn schedule_order(lattice: &CodeLattice) -> Vec<Vec<usize>> {
    (1..=4u8)
        .map(|sc| (0..lattice.plaquettes.len()).filter(|&i| lattice.plaquettes[i].subcycle == sc).collect())
        .collect()
}

/// Per-plaquette sampling tables for a fixed noise point.
pub struct ShotSampler<'a> {
    lattice: &'a CodeLattice,
    tables: Vec<Table>,
    /// table index per plaquette
    table_of: Vec<usize>,
    order: Vec<Vec<usize>>,
}

impl<'a> ShotSampler<'a> {
    /// Boundary plaquettes sample the marginal with absent slots dropped.
    pub fn new(
        lattice: &'a CodeLattice,
        dist_z: &RoundErrorDistribution,
        dist_x: &RoundErrorDistribution,
    ) -> Result<Self, SurfaceError> {
        for (want, d) in [(StabilizerType::Z, dist_z), (StabilizerType::X, dist_x)] {
            if d.stabilizer_type() != want {
                return Err(SurfaceError::DistributionType { expected: want, got: d.stabilizer_type() });
            }
        }
        let mut keys: Vec<(StabilizerType, [bool; 4])> = Vec::new();
        let mut tables = Vec::new();
        let mut table_of = Vec::new();
        for p in &lattice.plaquettes {
            let key = (p.kind, p.present());
            let idx = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    let base = if p.kind == StabilizerType::Z { dist_z } else { dist_x };
                    tables.push(Table::new(&base.marginalize(key.1))?);
                    keys.push(key);
                    keys.len() - 1
                }
            };
            table_of.push(idx);
        }
        Ok(ShotSampler { lattice, tables, table_of, order: schedule_order(lattice) })
    }

    /// One distribution per plaquette, given by `dist_of(plaquette index)`.
    pub fn per_plaquette(
        lattice: &'a CodeLattice,
        mut dist_of: impl FnMut(usize) -> RoundErrorDistribution,
    ) -> Result<Self, SurfaceError> {
        let mut tables = Vec::new();
        for (i, p) in lattice.plaquettes.iter().enumerate() {
            let d = dist_of(i);
            if d.stabilizer_type() != p.kind {
                return Err(SurfaceError::DistributionType { expected: p.kind, got: d.stabilizer_type() });
            }
            tables.push(Table::new(&d.marginalize(p.present()))?);
        }
        let table_of = (0..tables.len()).collect();
        Ok(ShotSampler { lattice, tables, table_of, order: schedule_order(lattice) })
    }

    pub fn lattice(&self) -> &CodeLattice {
        self.lattice
    }

    /// `rounds` noisy rounds plus one noiseless round.
    pub fn sample<R: Rng>(&self, rounds: usize, rng: &mut R) -> (SyndromeRecord, PauliFrame) {
        let lat = self.lattice;
        let mut frame = PauliFrame::new(lat.data_count());
        let mut rec = SyndromeRecord::new(rounds + 1, lat.plaquettes.len());
        for t in 0..rounds {
            for group in &self.order {
                for &i in group {
                    let p = &lat.plaquettes[i];
                    let table = &self.tables[self.table_of[i]];
                    let e = table.effects[table.alias.sample(rng)];
                    let (x, z, flip) = effect_parts(e);
                    rec.set(t, i, frame.detects(p) as u8 ^ flip as u8);
                    for (k, slot) in p.slots.iter().enumerate() {
                        if let Some(q) = *slot {
                            if (x >> k) & 1 == 1 {
                                frame.flip_x(q);
                            }
                            if (z >> k) & 1 == 1 {
                                frame.flip_z(q);
                            }
                        }
                    }
                }
            }
        }
        for (i, p) in lat.plaquettes.iter().enumerate() {
            rec.set(rounds, i, frame.detects(p) as u8);
        }
        (rec, frame)
    }
}

/// One shot: syndrome history and the accumulated error frame.
pub fn sample_shot<R: Rng>(
    lattice: &CodeLattice,
    dist_z: &RoundErrorDistribution,
    dist_x: &RoundErrorDistribution,
    rounds: usize,
    rng: &mut R,
) -> Result<(SyndromeRecord, PauliFrame), SurfaceError> {
    Ok(ShotSampler::new(lattice, dist_z, dist_x)?.sample(rounds, rng))
}

/// Logical failure bits `(z, x)`: anticommutation of the residual frame with
/// logical Z and with logical X.
pub fn logical_failure(lattice: &CodeLattice, frame: &PauliFrame) -> Result<(bool, bool), SurfaceError> {
    let violated = lattice.plaquettes.iter().filter(|p| frame.detects(p)).count();
    if violated > 0 {
        return Err(SurfaceError::NotCodespace(violated));
    }
    let z_fail = lattice.logical_z.iter().fold(false, |a, &q| a ^ frame.x(q));
    let x_fail = lattice.logical_x.iter().fold(false, |a, &q| a ^ frame.z(q));
    Ok((z_fail, x_fail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let l3 = build_lattice(3).unwrap();
        assert_eq!(l3.data_count(), 13);
        assert_eq!(l3.plaquettes_of(StabilizerType::X).len(), 6);
        assert_eq!(l3.plaquettes_of(StabilizerType::Z).len(), 6);
        assert_eq!(build_lattice(11).unwrap().data_count(), 221);
        assert!(build_lattice(4).is_err());
        assert!(build_lattice(17).is_err());
    }

    #[test]
    fn logical_failure_cases() {
        let l = build_lattice(5).unwrap();
        let empty = PauliFrame::new(l.data_count());
        assert_eq!(logical_failure(&l, &empty).unwrap(), (false, false));
        let lx = PauliFrame::from_pauli(&l.logical_x_pauli());
        assert_eq!(logical_failure(&l, &lx).unwrap(), (true, false));
        let st = PauliFrame::from_pauli(&l.plaquette_pauli(7));
        assert_eq!(logical_failure(&l, &st).unwrap(), (false, false));
        let mut bad = PauliFrame::new(l.data_count());
        bad.flip_x(12);
        assert!(logical_failure(&l, &bad).is_err());
    }
}
