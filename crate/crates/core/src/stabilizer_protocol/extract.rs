//! Exact round distribution from twirled Pauli faults pushed through the
//! Clifford skeleton of the check circuit.

use super::distribution::{effect_index, RoundErrorDistribution, EFFECT_COUNT};
use super::{
    check_circuit, feedback_steps, FaultInjection, NoiseParams, ProtocolError, StabilizerType, Step,
    ANC1, ANC2, DATA, WIRES,
};
use crate::noise_channels::cz_noise_channel;
use crate::quantum_core::{conjugate_pauli, swap_matrix, GateOp, Pauli, PauliString};
use crate::twirling::{reduced_twirl_gadget, PauliChannel};

/// Fault list of one location: (effect index, probability), zero-effect
/// entries included.
type Location = Vec<(usize, f64)>;

fn anticommutes_x(p: &PauliString, q: usize) -> bool {
    matches!(p.letters()[q], Pauli::Y | Pauli::Z)
}

fn set_letter(p: &PauliString, q: usize, l: Pauli) -> PauliString {
    let mut letters = p.letters().to_vec();
    letters[q] = l;
    PauliString::from_letters(letters)
}

fn times_x(p: &PauliString, qs: &[usize]) -> PauliString {
    let mut out = p.clone();
    for &q in qs {
        out = out.mul(&PauliString::single(WIRES, q, Pauli::X));
    }
    out.unsigned()
}

/// Effect of a Pauli fault inserted just before `rest`.
fn propagate(fault: PauliString, rest: &[Step]) -> usize {
    let mut p = fault;
    let mut prep_flip = false;
    let mut flip = false;
    for step in rest {
        match step {
            Step::Gate(g) => p = conjugate_pauli(g, &p).expect("Clifford skeleton"),
            Step::Gadget(a, b) => p = conjugate_pauli(&GateOp::cz(*a, *b), &p).expect("CZ is Clifford"),
            Step::MeasurePrep => {
                for &b in &ANC2 {
                    prep_flip ^= anticommutes_x(&p, b);
                    p = set_letter(&p, b, Pauli::I);
                }
            }
            Step::Feedback => {
                if prep_flip {
                    p = times_x(&p, &ANC1[..2]);
                }
            }
            Step::MeasureSyndrome => {
                for &a in &ANC1 {
                    flip ^= anticommutes_x(&p, a);
                    p = set_letter(&p, a, Pauli::I);
                }
            }
            Step::Depolarize(_) | Step::Dephase(_) => {}
        }
    }
    let (mut x, mut z) = (0u8, 0u8);
    for (k, &d) in DATA.iter().enumerate() {
        let (bx, bz) = p.letters()[d].bits();
        x |= (bx as u8) << k;
        z |= (bz as u8) << k;
    }
    effect_index(x, z, flip)
}

fn pauli_location(q: usize, p: f64, rest: &[Step]) -> Location {
    let mut loc = vec![(0, 1.0 - p)];
    for l in [Pauli::X, Pauli::Y, Pauli::Z] {
        loc.push((propagate(PauliString::single(WIRES, q, l), rest), p / 3.0));
    }
    loc
}

fn gadget_location(a: usize, b: usize, ch: &PauliChannel, rest: &[Step]) -> Location {
    ch.probabilities
        .iter()
        .map(|(label, &p)| {
            let mut c = label.chars();
            let p1 = Pauli::from_char(c.next().unwrap()).unwrap();
            let flip = c.next() == Some('X');
            let mut f = PauliString::single(WIRES, a, p1);
            if flip {
                f = set_letter(&f, b, Pauli::Z);
            }
            (propagate(f, rest), p)
        })
        .collect()
}

/// Drops round-off entries of a twirled gadget and renormalizes.
fn clean(mut ch: PauliChannel) -> PauliChannel {
    ch.probabilities.retain(|_, p| p.abs() > 1e-15);
    let total: f64 = ch.probabilities.values().sum();
    ch.probabilities.values_mut().for_each(|p| *p /= total);
    ch
}

struct Gadgets {
    plain: PauliChannel,
    injected: Option<(usize, PauliChannel)>,
}

impl Gadgets {
    fn for_wire(&self, data_wire: usize) -> &PauliChannel {
        match &self.injected {
            Some((w, ch)) if *w == data_wire => ch,
            _ => &self.plain,
        }
    }
}

fn locations(steps: &[Step], noise: &NoiseParams, gadgets: &Gadgets, out: &mut Vec<Location>) {
    for (i, step) in steps.iter().enumerate() {
        let rest = &steps[i + 1..];
        match step {
            Step::Depolarize(q) if noise.p_1q > 0.0 => out.push(pauli_location(*q, noise.p_1q, rest)),
            Step::Dephase(q) if noise.p_sh > 0.0 => {
                let p = noise.p_hop();
                out.push(vec![(0, 1.0 - p), (propagate(PauliString::single(WIRES, *q, Pauli::Z), rest), p)]);
            }
            Step::Gadget(a, b) => out.push(gadget_location(*a, *b, gadgets.for_wire(*a), rest)),
            _ => {}
        }
    }
}

fn convolve(locs: &[Location]) -> Vec<f64> {
    let mut dist = vec![0.0; EFFECT_COUNT];
    dist[0] = 1.0;
    for loc in locs {
        let mut next = vec![0.0; EFFECT_COUNT];
        for (e, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for &(f, q) in loc {
                next[e ^ f] += p * q;
            }
        }
        dist = next;
    }
    dist
}

/// Exact per-round distribution for the given noise point.
pub fn extract_round_distribution(
    stype: StabilizerType,
    noise: &NoiseParams,
) -> Result<RoundErrorDistribution, ProtocolError> {
    extract_round_distribution_with(stype, noise, None)
}

/// As [`extract_round_distribution`], optionally with a deterministic SWAP
/// after one data-ancilla control-Z.
pub fn extract_round_distribution_with(
    stype: StabilizerType,
    noise: &NoiseParams,
    injection: Option<FaultInjection>,
) -> Result<RoundErrorDistribution, ProtocolError> {
    noise.validate(0.1)?;
    let cz_noise = cz_noise_channel(noise.p_swap, noise.p_1q)?;
    let twirl = |ch| reduced_twirl_gadget(ch).map(clean).map_err(|e| ProtocolError::Twirl(e.to_string()));
    let plain = twirl(&cz_noise)?;
    let injected = match injection {
        Some(f) => {
            let swap = crate::noise_channels::QuantumChannel::unitary(swap_matrix());
            Some((DATA[f.node.index()], twirl(&cz_noise.then(&swap))?))
        }
        None => None,
    };
    let gadgets = Gadgets { plain, injected };

    let base = check_circuit(stype, &noise.convention);
    let fb = base.iter().position(|s| *s == Step::Feedback).expect("feedback marker");
    let mut odd = base[..=fb].to_vec();
    odd.extend(feedback_steps());
    odd.extend_from_slice(&base[fb + 1..]);

    let mut even_locs = Vec::new();
    locations(&base, noise, &gadgets, &mut even_locs);
    let mut odd_locs = Vec::new();
    locations(&odd, noise, &gadgets, &mut odd_locs);

    // the measured preparation parity is uniform and independent of faults
    let even = convolve(&even_locs);
    let odd = convolve(&odd_locs);
    let probs: Vec<f64> = even.iter().zip(&odd).map(|(a, b)| 0.5 * (a + b)).collect();
    RoundErrorDistribution::from_dense(stype, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_is_identity() {
        for t in [StabilizerType::X, StabilizerType::Z] {
            let d = extract_round_distribution(t, &NoiseParams::noiseless()).unwrap();
            assert_eq!(d.identity_mass(), 1.0);
        }
    }

    #[test]
    fn shuttle_faults_first_order() {
        let p = 1e-4;
        let d = extract_round_distribution(StabilizerType::Z, &NoiseParams::new(0.0, 0.0, p)).unwrap();
        let nonid = 1.0 - d.identity_mass();
        assert!((nonid - 3.0 * p).abs() < 10.0 * p * p);
        // Z on a shuttled ancilla-1 flips the syndrome; on the ancilla-2 it
        // triggers a wrong feedback that lands on data A, B
        assert!((d.prob("IIII", true) - 2.0 * p).abs() < 10.0 * p * p);
        assert!((d.prob("ZZII", false) - p).abs() < 10.0 * p * p);
        let dx = extract_round_distribution(StabilizerType::X, &NoiseParams::new(0.0, 0.0, p)).unwrap();
        assert!((dx.prob("XXII", false) - p).abs() < 10.0 * p * p);
    }

    #[test]
    fn rejects_large_parameters() {
        assert!(extract_round_distribution(StabilizerType::Z, &NoiseParams::new(0.2, 0.0, 0.0)).is_err());
    }
}
