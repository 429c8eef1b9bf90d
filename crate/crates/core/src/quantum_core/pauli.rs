//! Pauli strings with a phase in {+1, +i, -1, -i}.

use super::matrix::{CMatrix, C64, I, ONE, ZERO};
use super::QuantumError;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// (x, z) symplectic bits.
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2),
            Pauli::X => CMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Pauli::Y => CMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            Pauli::Z => CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
        }
    }

    /// Single-qubit product `self · other` as (power of i, letter).
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

/// `i^phase · letters[0] ⊗ letters[1] ⊗ ...`, with `letters[q]` acting on qubit `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { phase: 0, letters: vec![Pauli::I; n] }
    }

    pub fn new(phase: u8, letters: Vec<Pauli>) -> Self {
        PauliString { phase: phase & 3, letters }
    }

    pub fn from_letters(letters: Vec<Pauli>) -> Self {
        Self::new(0, letters)
    }

    /// Single-letter operator on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[q] = p;
        s
    }

    /// Parses labels such as `XIZ`, `-XY`, `+iZZ`, `-iX`.
    pub fn parse(label: &str) -> Result<Self, QuantumError> {
        let (phase, body) = if let Some(r) = label.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = label.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = label.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = label.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = label.strip_prefix('i') {
            (1, r)
        } else {
            (0, label)
        };
        let letters = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| QuantumError::BadLabel(label.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if letters.is_empty() {
            return Err(QuantumError::BadLabel(label.to_string()));
        }
        Ok(PauliString::new(phase, letters))
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> C64 {
        [ONE, I, -ONE, -I][self.phase as usize]
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Drops the phase (sign +1).
    pub fn unsigned(&self) -> Self {
        PauliString { phase: 0, letters: self.letters.clone() }
    }

    /// Letter string without phase prefix.
    pub fn letters_label(&self) -> String {
        self.letters.iter().map(|p| p.to_char()).collect()
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.len(), other.len(), "Pauli length mismatch");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase += ph;
                p
            })
            .collect();
        PauliString::new(phase & 3, letters)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        anti % 2 == 0
    }

    /// Dense matrix in the little-endian convention.
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.len();
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim);
        let ph = self.phase_value();
        for col in 0..dim {
            let mut row = col;
            let mut amp = ph;
            for (q, &p) in self.letters.iter().enumerate() {
                let bit = col >> q & 1;
                match p {
                    Pauli::I => {}
                    Pauli::X => row ^= 1 << q,
                    Pauli::Y => {
                        row ^= 1 << q;
                        amp *= if bit == 0 { I } else { -I };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                }
            }
            m.set(row, col, amp);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{}{}", pre, self.letters_label())
    }
}

/// All `4^n` unsigned Pauli strings on `n` qubits, ordered by base-4 index
/// with qubit 0 as the least significant digit.
pub fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..1usize << (2 * n))
        .map(|mut k| {
            let letters = (0..n)
                .map(|_| {
                    let p = Pauli::from_index(k & 3);
                    k >>= 2;
                    p
                })
                .collect();
            PauliString::from_letters(letters)
        })
        .collect()
}
