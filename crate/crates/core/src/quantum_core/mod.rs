//! Dense state-vector and density-operator simulation, Pauli strings and
//! Clifford conjugation.
//!
//! Qubit ordering is little-endian everywhere: bit `q` of a basis index is
//! the value of qubit `q`, and in ket and Pauli labels the leftmost character
//! is qubit 0. So `"01"` is the basis state with qubit 1 set (index 2).
//! Two-qubit gate matrices use the same rule locally: bit 0 of the 4×4 index
//! is `targets[0]`.

mod gate;
mod matrix;
mod pauli;
mod state;

pub use gate::{
    check_unitary, conjugate_pauli, exchange_matrix, gate_matrix, is_clifford, rotation,
    swap_matrix, GateKind, GateOp,
};
pub use matrix::{apply_local, embed, CMatrix, C64, I, ONE, ZERO};
pub use pauli::{all_paulis, Pauli, PauliString};
pub use state::{
    apply_gate, conjugate_flat, measure_pauli, DensityOperator, GateTarget, StateVector,
    MAX_DENSITY_QUBITS, MAX_STATE_QUBITS,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("target qubit {target} out of range for {qubits} qubits")]
    TargetOutOfRange { target: usize, qubits: usize },
    #[error("target qubit {0} repeated")]
    DuplicateTarget(usize),
    #[error("gate expects {expected} targets, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("input state not normalized (norm² or trace = {0})")]
    NotNormalized(f64),
    #[error("{requested} qubits exceeds the dense cap of {max}")]
    TooManyQubits { requested: usize, max: usize },
    #[error("dimension {0} is not a valid register size")]
    BadDimension(usize),
    #[error("gate {0} is not Clifford")]
    NotClifford(String),
    #[error("cannot parse label {0:?}")]
    BadLabel(String),
    #[error("measurement basis has weight 0")]
    TrivialMeasurement,
    #[error("measurement basis {0} is not Hermitian")]
    NotHermitian(String),
    #[error("selected measurement branch has zero probability")]
    ZeroProbabilityBranch,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn x_pi_flips_zero() {
        let s = StateVector::from_ket("0").unwrap();
        let out = apply_gate(&s, &GateOp::x(PI, 0)).unwrap();
        assert!((out.fidelity(&StateVector::from_ket("1").unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exchange_quarter_on_01() {
        let s = StateVector::from_ket("01").unwrap();
        let out = apply_gate(&s, &GateOp::exchange(FRAC_PI_4, 0, 1)).unwrap();
        let a = out.amplitudes();
        // |01⟩ is index 2, |10⟩ index 1
        assert!((a[2] - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((a[1] - C64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn cz_phase_on_11() {
        let plus = StateVector::from_amplitudes(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let s = plus.tensor(&StateVector::from_ket("1").unwrap()).unwrap();
        let out = apply_gate(&s, &GateOp::cz(0, 1)).unwrap();
        let a = out.amplitudes();
        assert!((a[2].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((a[3].re + FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn exchange_limits() {
        let sq = exchange_matrix(FRAC_PI_4);
        assert!(sq.mul(&sq).max_abs_diff_up_to_phase(&swap_matrix()) < 1e-12);
        assert!(exchange_matrix(FRAC_PI_2).max_abs_diff_up_to_phase(&swap_matrix()) < 1e-12);
    }

    #[test]
    fn gate_errors() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            apply_gate(&s, &GateOp::h(2)),
            Err(QuantumError::TargetOutOfRange { .. })
        ));
        let bad = StateVector::from_amplitudes(vec![ONE, ONE]).unwrap();
        assert!(matches!(apply_gate(&bad, &GateOp::h(0)), Err(QuantumError::NotNormalized(_))));
        assert!(StateVector::zero(13).is_err());
        assert!(GateOp::new(GateKind::CZ, &[1, 1]).is_err());
    }

    #[test]
    fn measurement_examples() {
        let plus = StateVector::from_amplitudes(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let x = PauliString::parse("X").unwrap();
        for draw in [0.0, 0.5, 0.999] {
            assert_eq!(measure_pauli(&plus, &x, draw).unwrap().0, 1);
        }
        let zero = StateVector::from_ket("0").unwrap();
        assert_eq!(measure_pauli(&zero, &x, 0.49).unwrap().0, 1);
        assert_eq!(measure_pauli(&zero, &x, 0.51).unwrap().0, -1);
        let bell = StateVector::from_amplitudes(vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            ZERO,
            ZERO,
            C64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let (o, post) = measure_pauli(&bell, &PauliString::parse("XX").unwrap(), 0.9999).unwrap();
        assert_eq!(o, 1);
        assert!((post.fidelity(&bell) - 1.0).abs() < 1e-12);
        assert!(measure_pauli(&bell, &PauliString::parse("II").unwrap(), 0.1).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let c = |g: GateOp, s: &str| conjugate_pauli(&g, &PauliString::parse(s).unwrap()).unwrap().to_string();
        assert_eq!(c(GateOp::cz(0, 1), "XI"), "+XZ");
        assert_eq!(c(GateOp::swap(0, 1), "XI"), "+IX");
        assert_eq!(c(GateOp::h(0), "Z"), "+X");
        assert!(conjugate_pauli(&GateOp::exchange(FRAC_PI_4, 0, 1), &PauliString::parse("XI").unwrap()).is_err());
    }

    #[test]
    fn pauli_weight_and_product() {
        assert_eq!(PauliString::identity(5).weight(), 0);
        let a = PauliString::parse("XYZI").unwrap();
        assert_eq!(a.weight(), 3);
        assert_eq!(a.mul(&PauliString::parse("YYII").unwrap()).to_string(), "+iZIZI");
        let dense = a.to_matrix().mul(&PauliString::parse("YYII").unwrap().to_matrix());
        assert!(dense.max_abs_diff(&PauliString::parse("iZIZI").unwrap().to_matrix()) < 1e-15);
    }
}
