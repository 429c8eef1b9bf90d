use proptest::prelude::*;
use spinnet::quantum_core::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn clifford_gate(n: usize) -> impl Strategy<Value = GateOp> {
    (0usize..8, 0..n, 0..n, -4i32..4).prop_filter_map("distinct targets", move |(k, a, b, q)| {
        let t = q as f64 * FRAC_PI_2;
        let two = a != b;
        Some(match k {
            0 => GateOp::x(t, a),
            1 => GateOp::y(t, a),
            2 => GateOp::z(t, a),
            3 => GateOp::h(a),
            4 if two => GateOp::cz(a, b),
            5 if two => GateOp::cnot(a, b),
            6 if two => GateOp::swap(a, b),
            7 if two => GateOp::exchange(t, a, b),
            _ => return None,
        })
    })
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (0u8..4, proptest::collection::vec(0usize..4, n))
        .prop_map(|(ph, l)| PauliString::new(ph, l.into_iter().map(Pauli::from_index).collect()))
}

fn circuit() -> impl Strategy<Value = (usize, Vec<GateOp>, PauliString)> {
    (2usize..=4).prop_flat_map(|n| {
        (Just(n), proptest::collection::vec(clifford_gate(n), 1..12), pauli_string(n))
    })
}

fn any_gate(n: usize) -> impl Strategy<Value = GateOp> {
    (0usize..8, 0..n, 1..n, -10.0f64..10.0).prop_map(move |(k, a, off, t)| {
        let b = (a + off) % n;
        match k {
            0 => GateOp::x(t, a),
            1 => GateOp::y(t, a),
            2 => GateOp::z(t, a),
            3 => GateOp::h(a),
            4 => GateOp::cz(a, b),
            5 => GateOp::cnot(a, b),
            6 => GateOp::swap(a, b),
            _ => GateOp::exchange(t, a, b),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn clifford_conjugation_matches_dense((n, gates, p) in circuit()) {
        let mut sym = p.clone();
        let mut dense = p.to_matrix();
        for g in &gates {
            sym = conjugate_pauli(g, &sym).unwrap();
            let u = embed(&g.matrix(), &g.targets, n);
            dense = u.mul(&dense).mul(&u.dagger());
        }
        prop_assert!(sym.to_matrix().max_abs_diff(&dense) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn norm_preserved_over_long_sequences(gates in proptest::collection::vec(any_gate(5), 1000)) {
        let mut s = StateVector::zero(5).unwrap();
        let mut rho = DensityOperator::from_state(&StateVector::zero(3).unwrap()).unwrap();
        for g in &gates {
            s = apply_gate(&s, g).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            if g.targets.iter().all(|&t| t < 3) {
                rho = apply_gate(&rho, g).unwrap();
            }
        }
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.matrix().is_hermitian(1e-10));
    }

    #[test]
    fn exchange_composes_additively(a in -PI..PI, b in -PI..PI) {
        let lhs = exchange_matrix(a).mul(&exchange_matrix(b));
        prop_assert!(lhs.max_abs_diff_up_to_phase(&exchange_matrix(a + b)) < 1e-12);
    }

    #[test]
    fn every_gate_is_unitary(t in -10.0f64..10.0) {
        for k in [GateKind::X(t), GateKind::Y(t), GateKind::Z(t), GateKind::H, GateKind::CZ,
                  GateKind::CNOT, GateKind::SWAP, GateKind::Exchange(t)] {
            prop_assert!(check_unitary(k));
        }
    }

    #[test]
    fn pauli_products_stay_in_group(a in pauli_string(4), b in pauli_string(4)) {
        let c = a.mul(&b);
        let dense = a.to_matrix().mul(&b.to_matrix());
        prop_assert!(c.to_matrix().max_abs_diff(&dense) < 1e-14);
        prop_assert!(c.phase() < 4);
    }
}
