use super::matrix::{CMatrix, C64, I, ONE, ZERO};
use super::pauli::{Pauli, PauliString};
use super::QuantumError;
use std::f64::consts::FRAC_PI_2;

/// Gate kinds. Rotations follow `R_a(θ) = exp(-iθσ_a/2)`, so `X(π) = -iX`.
/// `Exchange(θ) = cos θ·I - i sin θ·SWAP`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    X(f64),
    Y(f64),
    Z(f64),
    H,
    CZ,
    /// control = targets[0], target = targets[1]
    CNOT,
    SWAP,
    Exchange(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X(_) | GateKind::Y(_) | GateKind::Z(_) | GateKind::H => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Self, QuantumError> {
        if targets.len() != kind.arity() {
            return Err(QuantumError::Arity { expected: kind.arity(), got: targets.len() });
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(QuantumError::DuplicateTarget(targets[0]));
        }
        Ok(GateOp { kind, targets: targets.to_vec() })
    }

    pub fn x(theta: f64, q: usize) -> Self {
        GateOp { kind: GateKind::X(theta), targets: vec![q] }
    }
    pub fn y(theta: f64, q: usize) -> Self {
        GateOp { kind: GateKind::Y(theta), targets: vec![q] }
    }
    pub fn z(theta: f64, q: usize) -> Self {
        GateOp { kind: GateKind::Z(theta), targets: vec![q] }
    }
    pub fn h(q: usize) -> Self {
        GateOp { kind: GateKind::H, targets: vec![q] }
    }
    pub fn cz(a: usize, b: usize) -> Self {
        GateOp { kind: GateKind::CZ, targets: vec![a, b] }
    }
    pub fn cnot(c: usize, t: usize) -> Self {
        GateOp { kind: GateKind::CNOT, targets: vec![c, t] }
    }
    pub fn swap(a: usize, b: usize) -> Self {
        GateOp { kind: GateKind::SWAP, targets: vec![a, b] }
    }
    pub fn exchange(theta: f64, a: usize, b: usize) -> Self {
        GateOp { kind: GateKind::Exchange(theta), targets: vec![a, b] }
    }

    /// Local matrix; bit 0 of its index is `targets[0]`.
    pub fn matrix(&self) -> CMatrix {
        gate_matrix(self.kind)
    }
}

pub fn rotation(axis: Pauli, theta: f64) -> CMatrix {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    CMatrix::identity(2).scale(c).add(&axis.matrix().scale(s))
}

pub fn swap_matrix() -> CMatrix {
    CMatrix::from_real(4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.])
}

pub fn exchange_matrix(theta: f64) -> CMatrix {
    CMatrix::identity(4)
        .scale(C64::new(theta.cos(), 0.0))
        .add(&swap_matrix().scale(-I * theta.sin()))
}

pub fn gate_matrix(kind: GateKind) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::X(t) => rotation(Pauli::X, t),
        GateKind::Y(t) => rotation(Pauli::Y, t),
        GateKind::Z(t) => rotation(Pauli::Z, t),
        GateKind::H => CMatrix::from_real(2, &[h, h, h, -h]),
        GateKind::CZ => CMatrix::from_real(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.]),
        // index = c + 2t; flip t when c = 1
        GateKind::CNOT => CMatrix::from_real(4, &[1., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 1., 0., 0.]),
        GateKind::SWAP => swap_matrix(),
        GateKind::Exchange(t) => exchange_matrix(t),
    }
}

/// Quarter turns `k` with `theta ≈ k·π/2`, if any.
fn quarter_turns(theta: f64) -> Option<u8> {
    let k = (theta / FRAC_PI_2).round();
    if (theta - k * FRAC_PI_2).abs() < 1e-12 {
        Some((k as i64).rem_euclid(4) as u8)
    } else {
        None
    }
}

pub fn is_clifford(kind: GateKind) -> bool {
    match kind {
        GateKind::X(t) | GateKind::Y(t) | GateKind::Z(t) | GateKind::Exchange(t) => {
            quarter_turns(t).is_some()
        }
        _ => true,
    }
}

/// Image of the single-letter Pauli `p` on local qubit `q` (0 or 1) under the
/// gate's conjugation, as a local 1- or 2-letter string.
fn image(kind: GateKind, q: usize, p: Pauli) -> PauliString {
    let local = |letters: &[Pauli]| PauliString::from_letters(letters.to_vec());
    use Pauli::*;
    match kind {
        GateKind::X(t) | GateKind::Y(t) | GateKind::Z(t) => {
            let axis = match kind {
                GateKind::X(_) => X,
                GateKind::Y(_) => Y,
                _ => Z,
            };
            let k = quarter_turns(t).unwrap();
            let s = local(&[p]);
            if p == I || p == axis || k == 0 {
                return s;
            }
            let a = local(&[axis]);
            match k {
                1 => a.mul(&s).mul(&PauliString::new(3, vec![I])),
                2 => s.with_phase(2),
                _ => a.mul(&s).mul(&PauliString::new(1, vec![I])),
            }
        }
        GateKind::H => match p {
            X => local(&[Z]),
            Z => local(&[X]),
            Y => PauliString::new(2, vec![Y]),
            I => local(&[I]),
        },
        GateKind::CZ => match (q, p) {
            (0, X) => local(&[X, Z]),
            (1, X) => local(&[Z, X]),
            (0, p) => local(&[p, I]),
            (_, p) => local(&[I, p]),
        },
        GateKind::CNOT => match (q, p) {
            (0, X) => local(&[X, X]),
            (1, Z) => local(&[Z, Z]),
            (0, p) => local(&[p, I]),
            (_, p) => local(&[I, p]),
        },
        GateKind::SWAP => swap_image(q, p),
        GateKind::Exchange(t) => {
            if quarter_turns(t).unwrap() % 2 == 1 {
                swap_image(q, p)
            } else if q == 0 {
                local(&[p, I])
            } else {
                local(&[I, p])
            }
        }
    }
}

fn swap_image(q: usize, p: Pauli) -> PauliString {
    if q == 0 {
        PauliString::from_letters(vec![Pauli::I, p])
    } else {
        PauliString::from_letters(vec![p, Pauli::I])
    }
}

/// `G P G†` for a Clifford gate.
pub fn conjugate_pauli(gate: &GateOp, p: &PauliString) -> Result<PauliString, QuantumError> {
    if !is_clifford(gate.kind) {
        return Err(QuantumError::NotClifford(format!("{:?}", gate.kind)));
    }
    let n = p.len();
    for &t in &gate.targets {
        if t >= n {
            return Err(QuantumError::TargetOutOfRange { target: t, qubits: n });
        }
    }
    let k = gate.targets.len();
    // local part, phase carried separately
    let mut local = PauliString::identity(k);
    for (j, &t) in gate.targets.iter().enumerate() {
        let letter = p.letters()[t];
        let img = match letter {
            Pauli::I => continue,
            Pauli::Y => {
                // Y = i·X·Z
                let ix = image(gate.kind, j, Pauli::X);
                let iz = image(gate.kind, j, Pauli::Z);
                pad(&ix, k).mul(&pad(&iz, k)).mul(&PauliString::new(1, vec![Pauli::I; k]))
            }
            l => pad(&image(gate.kind, j, l), k),
        };
        local = local.mul(&img);
    }
    let mut letters = p.letters().to_vec();
    for (j, &t) in gate.targets.iter().enumerate() {
        letters[t] = local.letters()[j];
    }
    Ok(PauliString::new(p.phase() + local.phase(), letters))
}

fn pad(s: &PauliString, k: usize) -> PauliString {
    if s.len() == k {
        s.clone()
    } else {
        let mut l = s.letters().to_vec();
        l.resize(k, Pauli::I);
        PauliString::new(s.phase(), l)
    }
}

/// Numerically checks `U·U† = I` for the gate's matrix.
pub fn check_unitary(kind: GateKind) -> bool {
    gate_matrix(kind).is_unitary(1e-12)
}

#[allow(dead_code)]
pub(crate) fn basis_ket(bits: &[u8]) -> Vec<C64> {
    let n = bits.len();
    let mut v = vec![ZERO; 1 << n];
    let idx: usize = bits.iter().enumerate().map(|(q, &b)| (b as usize) << q).sum();
    v[idx] = ONE;
    v
}
