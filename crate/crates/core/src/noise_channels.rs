//! Physical noise channels (depolarizing, dephasing, SWAP error), the
//! over/under-rotated exchange gate and the error classes of the
//! exchange-based control-Z gate.

use crate::quantum_core::{
    all_paulis, conjugate_flat, embed, exchange_matrix, rotation, swap_matrix, CMatrix,
    DensityOperator, GateKind, GateOp, Pauli, QuantumError, C64, ZERO,
};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("over-rotation epsilon {0} outside [0, 0.3)")]
    Epsilon(f64),
    #[error("exchange error model must target pi/4, got {0}")]
    TargetAngle(f64),
    #[error("Kraus operator has dimension {got}, channel arity needs {expected}")]
    KrausDimension { expected: usize, got: usize },
    #[error("channel arity {0} not supported")]
    Arity(usize),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// CPTP map given by Kraus operators on `arity` qubits (little-endian).
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    arity: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(arity: usize, kraus: Vec<CMatrix>) -> Result<Self, NoiseError> {
        if arity == 0 || arity > 4 {
            return Err(NoiseError::Arity(arity));
        }
        let d = 1 << arity;
        for k in &kraus {
            if k.dim != d {
                return Err(NoiseError::KrausDimension { expected: d, got: k.dim });
            }
        }
        Ok(QuantumChannel { arity, kraus })
    }

    pub fn identity(arity: usize) -> Self {
        QuantumChannel { arity, kraus: vec![CMatrix::identity(1 << arity)] }
    }

    pub fn unitary(u: CMatrix) -> Self {
        let arity = u.dim.trailing_zeros() as usize;
        QuantumChannel { arity, kraus: vec![u] }
    }

    /// Probabilistic mixture `Σ p_i U_i ρ U_i†`.
    pub fn mixture(arity: usize, terms: &[(f64, CMatrix)]) -> Self {
        let kraus = terms
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, u)| u.scale(C64::new(p.sqrt(), 0.0)))
            .collect();
        QuantumChannel { arity, kraus }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &QuantumChannel) -> QuantumChannel {
        assert_eq!(self.arity, other.arity);
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for b in &other.kraus {
            for a in &self.kraus {
                let k = b.mul(a);
                if k.data.iter().any(|z| z.norm() > 1e-15) {
                    kraus.push(k);
                }
            }
        }
        QuantumChannel { arity: self.arity, kraus }
    }

    pub fn then_unitary(&self, u: &CMatrix) -> QuantumChannel {
        QuantumChannel { arity: self.arity, kraus: self.kraus.iter().map(|k| u.mul(k)).collect() }
    }

    pub fn after_unitary(&self, u: &CMatrix) -> QuantumChannel {
        QuantumChannel { arity: self.arity, kraus: self.kraus.iter().map(|k| k.mul(u)).collect() }
    }

    /// Lifts a channel on a subset of qubits to `arity` qubits.
    pub fn embed(&self, targets: &[usize], arity: usize) -> QuantumChannel {
        QuantumChannel { arity, kraus: self.kraus.iter().map(|k| embed(k, targets, arity)).collect() }
    }

    /// Applies the channel to a full `2^arity` square matrix.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(rho.dim);
        for k in &self.kraus {
            acc = acc.add(&k.mul(rho).mul(&k.dagger()));
        }
        acc
    }

    /// Applies the channel to `targets` of a density operator.
    pub fn apply(&self, rho: &DensityOperator, targets: &[usize]) -> Result<DensityOperator, NoiseError> {
        if targets.len() != self.arity {
            return Err(NoiseError::Arity(targets.len()));
        }
        Ok(rho.apply_kraus(&self.kraus, targets)?)
    }

    /// In-place application to a raw row-major matrix of `n` qubits.
    pub fn apply_flat(&self, data: &mut Vec<C64>, n: usize, targets: &[usize]) {
        if self.kraus.len() == 1 {
            conjugate_flat(data, n, &self.kraus[0], targets);
            return;
        }
        let mut acc = vec![ZERO; data.len()];
        for k in &self.kraus {
            let mut buf = data.clone();
            conjugate_flat(&mut buf, n, k, targets);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        *data = acc;
    }

    /// Choi matrix `Σ_K |K⟩⟩⟨⟨K|` with `|K⟩⟩ = (K ⊗ I)|Φ⟩`, unnormalized `|Φ⟩ = Σ|ii⟩`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim();
        let mut c = CMatrix::zeros(d * d);
        for k in &self.kraus {
            // vec index (out, in) -> out*d + in
            let v: Vec<C64> = (0..d * d).map(|idx| k.get(idx / d, idx % d)).collect();
            for a in 0..d * d {
                if v[a] == ZERO {
                    continue;
                }
                for b in 0..d * d {
                    c.data[a * d * d + b] += v[a] * v[b].conj();
                }
            }
        }
        c
    }

    /// Pauli-transfer matrix `R[P][Q] = Tr(P Λ(Q)) / 2^arity`, indices as in
    /// [`all_paulis`].
    pub fn ptm(&self) -> Vec<Vec<f64>> {
        let paulis: Vec<CMatrix> = all_paulis(self.arity).iter().map(|p| p.to_matrix()).collect();
        let d = self.dim() as f64;
        paulis
            .iter()
            .map(|p| {
                paulis
                    .iter()
                    .map(|q| p.mul(&self.apply_matrix(q)).trace().re / d)
                    .collect()
            })
            .collect()
    }

    pub fn trace_preservation_error(&self) -> f64 {
        let mut s = CMatrix::zeros(self.dim());
        for k in &self.kraus {
            s = s.add(&k.dagger().mul(k));
        }
        s.max_abs_diff(&CMatrix::identity(self.dim()))
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        self.choi().hermitian_eigenvalues()[0]
    }

    /// Trace preservation within 1e-10 and Choi positivity within -1e-9.
    pub fn is_cptp(&self) -> bool {
        self.trace_preservation_error() < 1e-10 && self.min_choi_eigenvalue() >= -1e-9
    }

    /// Largest entrywise distance between the Choi matrices of two channels.
    pub fn distance(&self, other: &QuantumChannel) -> f64 {
        self.choi().max_abs_diff(&other.choi())
    }
}

fn check_prob(p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::Probability(p))
    }
}

/// `ρ → (1-p)ρ + (p/3)(XρX + YρY + ZρZ)`.
pub fn depolarizing_channel(p: f64) -> Result<QuantumChannel, NoiseError> {
    check_prob(p)?;
    Ok(QuantumChannel::mixture(
        1,
        &[
            (1.0 - p, Pauli::I.matrix()),
            (p / 3.0, Pauli::X.matrix()),
            (p / 3.0, Pauli::Y.matrix()),
            (p / 3.0, Pauli::Z.matrix()),
        ],
    ))
}

/// `ρ → (1-p)ρ + pZρZ`. Values above 1/2 are accepted with a warning since
/// they are equivalent to `1-p` followed by a deterministic Z.
pub fn dephasing_channel(p: f64) -> Result<QuantumChannel, NoiseError> {
    check_prob(p)?;
    if p > 0.5 {
        log::warn!("dephasing probability {p} exceeds 1/2");
    }
    Ok(QuantumChannel::mixture(1, &[(1.0 - p, Pauli::I.matrix()), (p, Pauli::Z.matrix())]))
}

/// `ρ → (1-p)ρ + p·SWAP ρ SWAP`.
pub fn swap_error_channel(p: f64) -> Result<QuantumChannel, NoiseError> {
    check_prob(p)?;
    Ok(QuantumChannel::mixture(2, &[(1.0 - p, CMatrix::identity(4)), (p, swap_matrix())]))
}

/// Symmetric over/under-rotation of an exchange pulse aimed at `target_angle`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeErrorModel {
    pub target_angle: f64,
    pub epsilon: f64,
}

impl ExchangeErrorModel {
    pub fn sqrt_swap(epsilon: f64) -> Result<Self, NoiseError> {
        let m = ExchangeErrorModel { target_angle: FRAC_PI_4, epsilon };
        m.validate()?;
        Ok(m)
    }

    /// Model whose SWAP-error weight `ε²` equals `p_swap`.
    pub fn from_p_swap(p_swap: f64) -> Result<Self, NoiseError> {
        check_prob(p_swap)?;
        Self::sqrt_swap(p_swap.sqrt())
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if (self.target_angle - FRAC_PI_4).abs() > 1e-12 {
            return Err(NoiseError::TargetAngle(self.target_angle));
        }
        if !(0.0..0.3).contains(&self.epsilon) {
            return Err(NoiseError::Epsilon(self.epsilon));
        }
        Ok(())
    }

    /// SWAP-error probability `ε²` used by the circuit-level noise model.
    pub fn p_swap(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    /// Exact weight of the `SWAP·√SWAP` branch in the two-pulse average.
    /// `U_ex(π/4 ± ε) = U_ex(π/4)·U_ex(±ε)` makes the cross terms cancel and
    /// leaves `sin²ε`, whose leading term is `ε²`.
    pub fn exact_swap_weight(&self) -> f64 {
        self.epsilon.sin().powi(2)
    }
}

/// `½ U(π/4+ε)·U(π/4+ε)† + ½ U(π/4-ε)·U(π/4-ε)†`.
pub fn noisy_sqrt_swap(model: &ExchangeErrorModel) -> Result<QuantumChannel, NoiseError> {
    model.validate()?;
    let h = C64::new(0.5f64.sqrt(), 0.0);
    Ok(QuantumChannel {
        arity: 2,
        kraus: vec![
            exchange_matrix(model.target_angle + model.epsilon).scale(h),
            exchange_matrix(model.target_angle - model.epsilon).scale(h),
        ],
    })
}

/// `(1-w)·√SWAP-conjugation + w·(SWAP·√SWAP)-conjugation`.
pub fn sqrt_swap_decomposition(w: f64) -> QuantumChannel {
    let sq = exchange_matrix(FRAC_PI_4);
    QuantumChannel::mixture(2, &[(1.0 - w, sq.clone()), (w, swap_matrix().mul(&sq))])
}

/// One element of the exchange-based control-Z sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum CzStep {
    Gate(GateOp),
    /// depolarizing after a single-qubit rotation on local qubit `q`
    Depolarize(usize),
    /// SWAP error after an exchange pulse
    SwapError,
}

/// Control-Z as `Z_{π/2}⊗Z_{-π/2}`, `√SWAP`, `Z_π` on qubit 1, `√SWAP`, with
/// the noise locations of the circuit model. Local qubit 0 is "qubit 1".
pub fn cz_sequence() -> Vec<CzStep> {
    vec![
        CzStep::Gate(GateOp::z(FRAC_PI_2, 0)),
        CzStep::Depolarize(0),
        CzStep::Gate(GateOp::z(-FRAC_PI_2, 1)),
        CzStep::Depolarize(1),
        CzStep::Gate(GateOp::exchange(FRAC_PI_4, 0, 1)),
        CzStep::SwapError,
        CzStep::Gate(GateOp::z(PI, 0)),
        CzStep::Depolarize(0),
        CzStep::Gate(GateOp::exchange(FRAC_PI_4, 0, 1)),
        CzStep::SwapError,
    ]
}

/// Unitary of the noiseless sequence (equals CZ up to a global phase).
pub fn cz_sequence_unitary() -> CMatrix {
    let mut u = CMatrix::identity(4);
    for s in cz_sequence() {
        if let CzStep::Gate(g) = s {
            u = embed(&g.matrix(), &g.targets, 2).mul(&u);
        }
    }
    u
}

/// Full noisy control-Z channel with SWAP errors `p_swap` after each exchange
/// pulse and depolarizing `p_1q` after each rotation.
pub fn noisy_cz_channel(p_swap: f64, p_1q: f64) -> Result<QuantumChannel, NoiseError> {
    let dep = depolarizing_channel(p_1q)?;
    let sw = swap_error_channel(p_swap)?;
    let mut ch = QuantumChannel::identity(2);
    for s in cz_sequence() {
        ch = match s {
            CzStep::Gate(g) => ch.then_unitary(&embed(&g.matrix(), &g.targets, 2)),
            CzStep::Depolarize(q) => ch.then(&dep.embed(&[q], 2)),
            CzStep::SwapError => ch.then(&sw),
        };
    }
    Ok(ch)
}

/// Noise of the control-Z referred to after an ideal CZ:
/// `noisy = N ∘ CZ`, so `N = noisy ∘ CZ†`.
pub fn cz_noise_channel(p_swap: f64, p_1q: f64) -> Result<QuantumChannel, NoiseError> {
    let cz = GateOp::cz(0, 1).matrix();
    Ok(noisy_cz_channel(p_swap, p_1q)?.after_unitary(&cz.dagger()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CzErrorClass {
    /// SWAP after the second √SWAP: SWAP after the CZ
    SwapAfterSecond,
    /// SWAP after the first √SWAP: (Z₁Z₂)·SWAP after the CZ
    SwapAfterFirst,
    /// σ₁ after Z_π: √SWAP·σ₁·√SWAP† after the CZ
    SigmaAfterZPi,
    /// Pauli after one of the Z_{±π/2} rotations, still Pauli after the CZ
    RotationPauli,
}

#[derive(Clone, Debug)]
pub struct CzErrorTerm {
    pub class: CzErrorClass,
    pub probability: f64,
    pub label: String,
    /// Error operator `E` with faulty sequence = `E·CZ` up to global phase.
    pub operator: CMatrix,
}

/// Unitary of the sequence with `fault` inserted after step `at`.
pub fn faulty_cz_unitary(at: usize, fault: &CMatrix) -> CMatrix {
    let mut u = CMatrix::identity(4);
    for (i, s) in cz_sequence().into_iter().enumerate() {
        if let CzStep::Gate(g) = s {
            u = embed(&g.matrix(), &g.targets, 2).mul(&u);
        }
        if i == at {
            u = fault.mul(&u);
        }
    }
    u
}

/// Single-fault error catalogue of the exchange-based CZ, each fault
/// propagated to after the gate by dense multiplication. Zero-probability
/// terms are omitted.
pub fn cz_error_catalogue(model: &ExchangeErrorModel, p_1q: f64) -> Result<Vec<CzErrorTerm>, NoiseError> {
    model.validate()?;
    check_prob(p_1q)?;
    let cz_dag = GateOp::cz(0, 1).matrix().dagger();
    let p_swap = model.p_swap();
    let mut out = Vec::new();
    let mut zpi_seen = false;
    let mut swap_seen = 0;
    for (i, s) in cz_sequence().into_iter().enumerate() {
        match s {
            CzStep::SwapError if p_swap > 0.0 => {
                let class = if swap_seen == 0 { CzErrorClass::SwapAfterFirst } else { CzErrorClass::SwapAfterSecond };
                swap_seen += 1;
                out.push(CzErrorTerm {
                    class,
                    probability: p_swap,
                    label: format!("SWAP@{i}"),
                    operator: faulty_cz_unitary(i, &swap_matrix()).mul(&cz_dag),
                });
            }
            CzStep::SwapError => swap_seen += 1,
            CzStep::Depolarize(q) => {
                let after_zpi = matches!(cz_sequence()[i - 1], CzStep::Gate(GateOp { kind: GateKind::Z(t), .. }) if (t - PI).abs() < 1e-12);
                if after_zpi {
                    zpi_seen = true;
                }
                if p_1q == 0.0 {
                    continue;
                }
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let fault = embed(&p.matrix(), &[q], 2);
                    out.push(CzErrorTerm {
                        class: if after_zpi { CzErrorClass::SigmaAfterZPi } else { CzErrorClass::RotationPauli },
                        probability: p_1q / 3.0,
                        label: format!("{}{}@{i}", p.to_char(), q + 1),
                        operator: faulty_cz_unitary(i, &fault).mul(&cz_dag),
                    });
                }
            }
            _ => {}
        }
    }
    debug_assert!(zpi_seen);
    Ok(out)
}

/// Expectation `Tr(ρ P)` of a single-qubit Pauli for a one-qubit matrix.
pub fn single_qubit_expectation(rho: &CMatrix, p: Pauli) -> f64 {
    p.matrix().mul(rho).trace().re
}

/// Rotation helper re-exported for twirling tests: `exp(-iθσ/2)` conjugation.
pub fn rotation_channel(axis: Pauli, theta: f64) -> QuantumChannel {
    QuantumChannel::unitary(rotation(axis, theta))
}
