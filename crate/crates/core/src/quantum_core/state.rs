use super::gate::GateOp;
use super::matrix::{apply_local, CMatrix, C64, ONE, ZERO};
use super::pauli::PauliString;
use super::QuantumError;

pub const MAX_STATE_QUBITS: usize = 12;
pub const MAX_DENSITY_QUBITS: usize = 10;
const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self, QuantumError> {
        if n > MAX_STATE_QUBITS {
            return Err(QuantumError::TooManyQubits { requested: n, max: MAX_STATE_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(StateVector { n, amps })
    }

    /// Computational basis state; `bits[q]` is the value of qubit `q`.
    pub fn basis(bits: &[u8]) -> Result<Self, QuantumError> {
        let mut s = Self::zero(bits.len())?;
        s.amps[0] = ZERO;
        let idx: usize = bits.iter().enumerate().map(|(q, &b)| ((b & 1) as usize) << q).sum();
        s.amps[idx] = ONE;
        Ok(s)
    }

    /// Parses a ket string such as `"0110"` (leftmost character is qubit 0).
    /// Product ket over `0`, `1`, `+`, `-`; the leftmost character is qubit 0.
    pub fn from_ket(ket: &str) -> Result<Self, QuantumError> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let single = ket
            .chars()
            .map(|c| match c {
                '0' => Ok([ONE, ZERO]),
                '1' => Ok([ZERO, ONE]),
                '+' => Ok([C64::new(h, 0.0), C64::new(h, 0.0)]),
                '-' => Ok([C64::new(h, 0.0), C64::new(-h, 0.0)]),
                _ => Err(QuantumError::BadLabel(ket.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = single.len();
        if n == 0 {
            return Err(QuantumError::BadLabel(ket.to_string()));
        }
        if n > MAX_STATE_QUBITS {
            return Err(QuantumError::TooManyQubits { requested: n, max: MAX_STATE_QUBITS });
        }
        let amps = (0..1usize << n)
            .map(|i| single.iter().enumerate().fold(ONE, |acc, (q, s)| acc * s[(i >> q) & 1]))
            .collect();
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, QuantumError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(QuantumError::BadDimension(len));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_STATE_QUBITS {
            return Err(QuantumError::TooManyQubits { requested: n, max: MAX_STATE_QUBITS });
        }
        Ok(StateVector { n, amps })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QuantumError> {
        // self on the low qubits
        let n = self.n + other.n;
        if n > MAX_STATE_QUBITS {
            return Err(QuantumError::TooManyQubits { requested: n, max: MAX_STATE_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n];
        for (j, b) in other.amps.iter().enumerate() {
            for (i, a) in self.amps.iter().enumerate() {
                amps[(j << self.n) | i] = a * b;
            }
        }
        Ok(StateVector { n, amps })
    }

    fn check_targets(&self, targets: &[usize]) -> Result<(), QuantumError> {
        check_targets(targets, self.n)
    }

    /// Applies an arbitrary local operator without normalization checks.
    pub fn apply_matrix(&mut self, op: &CMatrix, targets: &[usize]) -> Result<(), QuantumError> {
        self.check_targets(targets)?;
        apply_local(&mut self.amps, op, targets);
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), QuantumError> {
        if p.len() != self.n {
            return Err(QuantumError::BadDimension(p.len()));
        }
        let ph = p.phase_value();
        for (q, &l) in p.letters().iter().enumerate() {
            if l != super::pauli::Pauli::I {
                apply_local(&mut self.amps, &l.matrix(), &[q]);
            }
        }
        self.amps.iter_mut().for_each(|a| *a *= ph);
        Ok(())
    }

    /// Expectation value `⟨ψ|P|ψ⟩` (real part for Hermitian `P`).
    pub fn expectation(&self, p: &PauliString) -> Result<f64, QuantumError> {
        let mut t = self.clone();
        t.apply_pauli(p)?;
        Ok(self.inner(&t).re)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    n: usize,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn from_state(s: &StateVector) -> Result<Self, QuantumError> {
        if s.n > MAX_DENSITY_QUBITS {
            return Err(QuantumError::TooManyQubits { requested: s.n, max: MAX_DENSITY_QUBITS });
        }
        let dim = 1 << s.n;
        let mut m = CMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = s.amps[r] * s.amps[c].conj();
            }
        }
        Ok(DensityOperator { n: s.n, matrix: m })
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self, QuantumError> {
        let dim = matrix.dim;
        if !dim.is_power_of_two() {
            return Err(QuantumError::BadDimension(dim));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_DENSITY_QUBITS {
            return Err(QuantumError::TooManyQubits { requested: n, max: MAX_DENSITY_QUBITS });
        }
        Ok(DensityOperator { n, matrix })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Checks Hermiticity, unit trace and positivity (eigenvalues ≥ -1e-9).
    pub fn is_valid(&self) -> bool {
        self.matrix.is_hermitian(1e-10)
            && (self.trace() - 1.0).abs() < 1e-10
            && self.matrix.hermitian_eigenvalues()[0] >= -1e-9
    }

    /// `ρ → K ρ K†` for a local operator, no trace checks.
    pub fn conjugate_local(&self, op: &CMatrix, targets: &[usize]) -> Result<DensityOperator, QuantumError> {
        check_targets(targets, self.n)?;
        let mut out = self.clone();
        conjugate_flat(&mut out.matrix.data, self.n, op, targets);
        Ok(out)
    }

    /// `ρ → Σ_k K_k ρ K_k†` for local Kraus operators.
    pub fn apply_kraus(&self, kraus: &[CMatrix], targets: &[usize]) -> Result<DensityOperator, QuantumError> {
        check_targets(targets, self.n)?;
        let mut acc = CMatrix::zeros(self.matrix.dim);
        for k in kraus {
            let mut buf = self.matrix.data.clone();
            conjugate_flat(&mut buf, self.n, k, targets);
            for (a, b) in acc.data.iter_mut().zip(buf) {
                *a += b;
            }
        }
        Ok(DensityOperator { n: self.n, matrix: acc })
    }

    pub fn expectation(&self, p: &PauliString) -> f64 {
        let pm = super::matrix::embed(&p.to_matrix(), &(0..p.len()).collect::<Vec<_>>(), self.n);
        pm.mul(&self.matrix).trace().re
    }
}

/// Left-multiplies by `op` and right-multiplies by `op†` on a row-major
/// `2^n × 2^n` matrix viewed as a `2n`-qubit vector (column bits low).
pub fn conjugate_flat(data: &mut [C64], n: usize, op: &CMatrix, targets: &[usize]) {
    let rows: Vec<usize> = targets.iter().map(|t| t + n).collect();
    apply_local(data, op, &rows);
    apply_local(data, &op.conj(), targets);
}

fn check_targets(targets: &[usize], n: usize) -> Result<(), QuantumError> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(QuantumError::TargetOutOfRange { target: t, qubits: n });
        }
        if targets[..i].contains(&t) {
            return Err(QuantumError::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Register types gates can act on.
pub trait GateTarget: Sized {
    fn apply_gate(&self, gate: &GateOp) -> Result<Self, QuantumError>;
}

impl GateTarget for StateVector {
    fn apply_gate(&self, gate: &GateOp) -> Result<Self, QuantumError> {
        self.check_targets(&gate.targets)?;
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        let mut out = self.clone();
        apply_local(&mut out.amps, &gate.matrix(), &gate.targets);
        Ok(out)
    }
}

impl GateTarget for DensityOperator {
    fn apply_gate(&self, gate: &GateOp) -> Result<Self, QuantumError> {
        check_targets(&gate.targets, self.n)?;
        let tr = self.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(tr));
        }
        self.conjugate_local(&gate.matrix(), &gate.targets)
    }
}

pub fn apply_gate<T: GateTarget>(state: &T, gate: &GateOp) -> Result<T, QuantumError> {
    state.apply_gate(gate)
}

/// Projective measurement of a Hermitian Pauli observable. The outcome is `+1`
/// when `draw < P(+1)`.
pub fn measure_pauli(
    state: &StateVector,
    basis: &PauliString,
    draw: f64,
) -> Result<(i8, StateVector), QuantumError> {
    if basis.weight() == 0 {
        return Err(QuantumError::TrivialMeasurement);
    }
    if !basis.is_hermitian() {
        return Err(QuantumError::NotHermitian(basis.to_string()));
    }
    let mut pp = state.clone();
    pp.apply_pauli(basis)?;
    let norm = state.norm_sqr();
    let exp = state.inner(&pp).re / norm;
    let p_plus = ((1.0 + exp) / 2.0).clamp(0.0, 1.0);
    let (outcome, prob, sign) = if draw < p_plus { (1i8, p_plus, 1.0) } else { (-1i8, 1.0 - p_plus, -1.0) };
    if prob < 1e-14 {
        return Err(QuantumError::ZeroProbabilityBranch);
    }
    let scale = 1.0 / (2.0 * (prob * norm).sqrt());
    let amps = state
        .amps
        .iter()
        .zip(&pp.amps)
        .map(|(a, b)| (a + b * sign) * scale)
        .collect();
    Ok((outcome, StateVector { n: state.n, amps }))
}
