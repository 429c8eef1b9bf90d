//! Density-operator reference for the round distribution.
//!
//! The preparation runs as a 6-qubit density matrix for each of its four
//! twirl assignments, with measurement projections and feedback applied
//! explicitly. The stage acts on the four (data, ancilla-1) pairs
//! independently, so it is held as four 2-qubit transfer matrices; averaging
//! the 16 stage assignments equals the product of per-node averages. The
//! resulting instrument on (data, syndrome) is decomposed into (Pauli, flip)
//! probabilities by an inverse Fourier transform over the commutant of the
//! measured stabilizer.

use super::distribution::{effect_index, RoundErrorDistribution, EFFECT_COUNT};
use super::{
    ancilla_singlets, FaultInjection, NoiseConvention, NoiseParams, ProtocolError, StabilizerType,
};
use crate::noise_channels::{
    cz_sequence, dephasing_channel, depolarizing_channel, swap_error_channel, CzStep, QuantumChannel,
};
use crate::quantum_core::{
    all_paulis, conjugate_flat, swap_matrix, CMatrix, GateOp, Pauli, PauliString, C64, ZERO,
};
use std::f64::consts::PI;

type Ptm = [[f64; 16]; 16];

/// Oracle output with diagnostics.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub distribution: RoundErrorDistribution,
    /// largest instrument entry that a (Pauli, flip) model must leave zero
    pub non_pauli_residual: f64,
    /// disagreement of the redundant Fourier coefficients with the fit
    pub model_mismatch: f64,
    /// probability of each reported syndrome over a maximally mixed input
    pub trace: f64,
}

struct Channels {
    dep: QuantumChannel,
    swap_err: QuantumChannel,
    dephase: QuantumChannel,
}

impl Channels {
    fn new(noise: &NoiseParams) -> Result<Self, ProtocolError> {
        Ok(Channels {
            dep: depolarizing_channel(noise.p_1q)?,
            swap_err: swap_error_channel(noise.p_swap)?,
            dephase: dephasing_channel(noise.p_hop())?,
        })
    }
}

fn pauli_matrix(l: Pauli) -> CMatrix {
    l.matrix()
}

/// Noisy control-Z on `(q1, q2)` of an `n`-qubit flat density, with twirl
/// branch `g` (pre `Z₁X₂`, post `X₂`) and an optional trailing SWAP.
fn dense_gadget(rho: &mut Vec<C64>, n: usize, q1: usize, q2: usize, g: bool, inject: bool, ch: &Channels) {
    if g {
        conjugate_flat(rho, n, &pauli_matrix(Pauli::Z), &[q1]);
        conjugate_flat(rho, n, &pauli_matrix(Pauli::X), &[q2]);
    }
    let map = [q1, q2];
    for step in cz_sequence() {
        match step {
            CzStep::Gate(op) => {
                let t: Vec<usize> = op.targets.iter().map(|&t| map[t]).collect();
                conjugate_flat(rho, n, &op.matrix(), &t);
            }
            CzStep::Depolarize(q) => ch.dep.apply_flat(rho, n, &[map[q]]),
            CzStep::SwapError => ch.swap_err.apply_flat(rho, n, &map),
        }
    }
    if inject {
        conjugate_flat(rho, n, &swap_matrix(), &map);
    }
    if g {
        conjugate_flat(rho, n, &pauli_matrix(Pauli::X), &[q2]);
    }
}

/// Ancilla-1 state after preparation and feedback, averaged over the
/// preparation twirl assignments and summed over measurement branches.
fn prepared_ancillas(noise: &NoiseParams, ch: &Channels) -> Vec<C64> {
    let conv: &NoiseConvention = &noise.convention;
    let psi = ancilla_singlets();
    let a = psi.amplitudes();
    let mut base = vec![ZERO; 64 * 64];
    for r in 0..64 {
        for c in 0..64 {
            base[r * 64 + c] = a[r] * a[c].conj();
        }
    }
    let mut sigma = vec![ZERO; 256];
    for assign in 0..4 {
        let mut rho = base.clone();
        if conv.init_depolarizing {
            for q in 0..6 {
                ch.dep.apply_flat(&mut rho, 6, &[q]);
            }
        }
        for q in [1, 3, 5] {
            for _ in 0..conv.shuttle_hops {
                ch.dephase.apply_flat(&mut rho, 6, &[q]);
            }
        }
        for q in [0, 2, 4] {
            conjugate_flat(&mut rho, 6, &GateOp::y(PI, q).matrix(), &[q]);
            ch.dep.apply_flat(&mut rho, 6, &[q]);
        }
        dense_gadget(&mut rho, 6, 0, 4, assign & 1 == 1, false, ch);
        dense_gadget(&mut rho, 6, 2, 5, assign & 2 == 2, false, ch);
        if conv.pre_measurement_depolarizing {
            ch.dep.apply_flat(&mut rho, 6, &[4]);
            ch.dep.apply_flat(&mut rho, 6, &[5]);
        }
        for m in 0..4usize {
            // Tr_b[(I ⊗ Π_m) ρ], ⟨b'|Π_m|b⟩ = Π_k ½ (−1)^{m_k [b_k ≠ b'_k]}
            let mut red = vec![ZERO; 256];
            for i in 0..16 {
                for j in 0..16 {
                    let mut acc = ZERO;
                    for b in 0..4usize {
                        for bp in 0..4usize {
                            let diff = b ^ bp;
                            let sign = if (diff & m).count_ones() % 2 == 1 { -0.25 } else { 0.25 };
                            acc += rho[(i | (b << 4)) * 64 + (j | (bp << 4))] * sign;
                        }
                    }
                    red[i * 16 + j] = acc;
                }
            }
            if (m & 1) ^ (m >> 1) == 1 {
                for q in [0, 1] {
                    conjugate_flat(&mut red, 4, &GateOp::x(PI, q).matrix(), &[q]);
                    ch.dep.apply_flat(&mut red, 4, &[q]);
                }
            }
            for (s, r) in sigma.iter_mut().zip(&red) {
                *s += r * 0.25;
            }
        }
    }
    sigma
}

/// Transfer matrix of one node's stage on (data, ancilla-1) for twirl branch
/// `g`; index `data_letter + 4·ancilla_letter`.
fn node_ptm(stype: StabilizerType, noise: &NoiseParams, ch: &Channels, g: bool, inject: bool) -> Ptm {
    let paulis = all_paulis(2);
    let mats: Vec<CMatrix> = paulis.iter().map(|p| p.to_matrix()).collect();
    let mut t = [[0.0; 16]; 16];
    for (qi, qm) in mats.iter().enumerate() {
        let mut rho = qm.data.clone();
        let h = GateOp::h(0).matrix();
        if stype == StabilizerType::X {
            conjugate_flat(&mut rho, 2, &h, &[0]);
            ch.dep.apply_flat(&mut rho, 2, &[0]);
        }
        dense_gadget(&mut rho, 2, 0, 1, g, inject, ch);
        if stype == StabilizerType::X {
            conjugate_flat(&mut rho, 2, &h, &[0]);
            ch.dep.apply_flat(&mut rho, 2, &[0]);
        }
        if noise.convention.pre_measurement_depolarizing {
            ch.dep.apply_flat(&mut rho, 2, &[1]);
        }
        let out = CMatrix { dim: 4, data: rho };
        for (pi, pm) in mats.iter().enumerate() {
            t[pi][qi] = pm.mul(&out).trace().re / 4.0;
        }
    }
    t
}

fn average(a: &Ptm, b: &Ptm) -> Ptm {
    let mut t = [[0.0; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            t[i][j] = 0.5 * (a[i][j] + b[i][j]);
        }
    }
    t
}

fn digit(i: usize, k: usize) -> usize {
    (i >> (2 * k)) & 3
}

/// Instrument `R_s(P, Q) = Tr[P M_s(Q)] / 16` for all data Paulis (indices in
/// [`all_paulis`] order), returned as `[s][P * 256 + Q]`.
fn instrument(coeff: &[f64], nodes: &[Ptm; 4]) -> [Vec<f64>; 2] {
    let mut r = [vec![0.0; 65536], vec![0.0; 65536]];
    const IX: usize = 0;
    const XX: usize = 4; // ancilla letter X
    for q in 0..256 {
        for (a, &c) in coeff.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut alpha = [[0.0; 4]; 4];
            let mut beta = [[0.0; 4]; 4];
            for k in 0..4 {
                let col = digit(q, k) + 4 * digit(a, k);
                for p in 0..4 {
                    alpha[k][p] = nodes[k][p + IX][col];
                    beta[k][p] = nodes[k][p + XX][col];
                }
            }
            for p in 0..256 {
                let (p0, p1, p2, p3) = (digit(p, 0), digit(p, 1), digit(p, 2), digit(p, 3));
                let ta = alpha[0][p0] * alpha[1][p1] * alpha[2][p2] * alpha[3][p3];
                let tb = beta[0][p0] * beta[1][p1] * beta[2][p2] * beta[3][p3];
                r[0][p * 256 + q] += 8.0 * c * (ta + tb);
                r[1][p * 256 + q] += 8.0 * c * (ta - tb);
            }
        }
    }
    r
}

fn masks(p: &PauliString) -> (u8, u8) {
    let (mut x, mut z) = (0u8, 0u8);
    for (k, l) in p.letters().iter().enumerate() {
        let (bx, bz) = l.bits();
        x |= (bx as u8) << k;
        z |= (bz as u8) << k;
    }
    (x, z)
}

fn symplectic(a: (u8, u8), b: (u8, u8)) -> bool {
    ((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()) % 2 == 1
}

/// Density-operator reference distribution (modulo the measured stabilizer:
/// mass of `E` and `E·S` sits on the smaller effect index).
pub fn oracle_round_distribution(
    stype: StabilizerType,
    noise: &NoiseParams,
) -> Result<RoundErrorDistribution, ProtocolError> {
    Ok(oracle_round_report(stype, noise, None, false)?.distribution)
}

/// Full oracle run. With `literal` the 16 stage twirl assignments are summed
/// one by one instead of through per-node averages.
pub fn oracle_round_report(
    stype: StabilizerType,
    noise: &NoiseParams,
    injection: Option<FaultInjection>,
    literal: bool,
) -> Result<OracleReport, ProtocolError> {
    noise.validate(0.5)?;
    let ch = Channels::new(noise)?;
    let sigma = prepared_ancillas(noise, &ch);

    let paulis = all_paulis(4);
    let coeff: Vec<f64> = paulis
        .iter()
        .map(|a| {
            let m = a.to_matrix();
            let mut tr = ZERO;
            for i in 0..16 {
                for j in 0..16 {
                    tr += m.data[i * 16 + j] * sigma[j * 16 + i];
                }
            }
            tr.re / 16.0
        })
        .collect();

    let branch = |k: usize, g: bool| {
        let inject = injection.is_some_and(|f| f.node.index() == k);
        node_ptm(stype, noise, &ch, g, inject)
    };
    let per_node: Vec<[Ptm; 2]> = (0..4).map(|k| [branch(k, false), branch(k, true)]).collect();
    let r = if literal {
        let mut acc = [vec![0.0; 65536], vec![0.0; 65536]];
        for assign in 0..16usize {
            let nodes: [Ptm; 4] = std::array::from_fn(|k| per_node[k][(assign >> k) & 1]);
            let part = instrument(&coeff, &nodes);
            for s in 0..2 {
                for (a, b) in acc[s].iter_mut().zip(&part[s]) {
                    *a += b / 16.0;
                }
            }
        }
        acc
    } else {
        let nodes: [Ptm; 4] = std::array::from_fn(|k| average(&per_node[k][0], &per_node[k][1]));
        instrument(&coeff, &nodes)
    };

    decompose(stype, &paulis, &r)
}

fn decompose(stype: StabilizerType, paulis: &[PauliString], r: &[Vec<f64>; 2]) -> Result<OracleReport, ProtocolError> {
    let s_letter = stype.letter();
    let s = PauliString::from_letters(vec![s_letter; 4]);
    let s_mask = masks(&s);
    let index_of = |m: (u8, u8)| paulis.iter().position(|p| masks(p) == m).unwrap();
    let pm: Vec<(u8, u8)> = paulis.iter().map(masks).collect();

    let commutant: Vec<usize> = (0..256).filter(|&q| !symplectic(pm[q], s_mask)).collect();
    // signed partner QS for each commuting Q
    let partner = |q: usize| -> (usize, f64) {
        let prod = paulis[q].mul(&s);
        let sign = match prod.phase() {
            0 => 1.0,
            2 => -1.0,
            _ => unreachable!("commuting Hermitian product"),
        };
        (index_of((pm[q].0 ^ s_mask.0, pm[q].1 ^ s_mask.1)), sign)
    };

    let mut residual = 0.0f64;
    for q in 0..256 {
        let allowed: Vec<usize> = if commutant.contains(&q) { vec![q, partner(q).0] } else { vec![] };
        for p in 0..256 {
            if allowed.contains(&p) {
                continue;
            }
            for rs in r {
                residual = residual.max(rs[p * 256 + q].abs());
            }
        }
    }

    let a_of = |q: usize| r[0][q * 256 + q] + r[1][q * 256 + q];
    let b_of = |q: usize| {
        let (qs, sign) = partner(q);
        sign * (r[0][qs * 256 + q] - r[1][qs * 256 + q])
    };
    // ĝ_f(Q) for Q in the commutant
    let mut g_hat = [vec![0.0; 256], vec![0.0; 256]];
    for &q in &commutant {
        let (qs, _) = partner(q);
        let a = a_of(q);
        let b = b_of(qs);
        g_hat[0][q] = 0.5 * (a + b);
        g_hat[1][q] = 0.5 * (a - b);
    }

    let mut probs = vec![0.0; EFFECT_COUNT];
    let n = commutant.len() as f64;
    for e in 0..256 {
        let em = pm[e];
        let idx = effect_index(em.0, em.1, false);
        let rep = idx.min(effect_index(em.0 ^ s_mask.0, em.1 ^ s_mask.1, false));
        if rep != idx {
            continue;
        }
        for f in 0..2 {
            let mut acc = 0.0;
            for &q in &commutant {
                let chi = if symplectic(pm[q], em) { -1.0 } else { 1.0 };
                acc += g_hat[f][q] * chi;
            }
            probs[rep | (f << 8)] = acc / n;
        }
    }

    // redundant coefficients: A(QS) = Σ p χ_Q (−1)^{c(E)}, B(Q) = Σ p χ_Q (−1)^{f⊕c(E)}
    let mut mismatch = 0.0f64;
    for &q in &commutant {
        let (qs, _) = partner(q);
        let (mut pa, mut pb) = (0.0, 0.0);
        for (e, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let em = ((e & 15) as u8, ((e >> 4) & 15) as u8);
            let f = (e >> 8) & 1 == 1;
            let chi = if symplectic(pm[q], em) { -1.0 } else { 1.0 };
            let c = symplectic(em, s_mask);
            pa += p * chi * if c { -1.0 } else { 1.0 };
            pb += p * chi * if c ^ f { -1.0 } else { 1.0 };
        }
        mismatch = mismatch.max((a_of(qs) - pa).abs()).max((b_of(q) - pb).abs());
    }

    let trace = a_of(0);
    // clean round-off negatives before validation
    for p in probs.iter_mut() {
        if *p < 0.0 && *p > -1e-13 {
            *p = 0.0;
        }
    }
    let distribution = RoundErrorDistribution::from_dense(stype, probs)?;
    Ok(OracleReport { distribution, non_pauli_residual: residual, model_mismatch: mismatch, trace })
}
