use proptest::prelude::*;
use rand::SeedableRng;
use spinnet::rng::{stream_rng, substream};
use spinnet::stabilizer_protocol::{effect_parts, extract_round_distribution};
use spinnet::surface_code::{build_lattice, logical_failure, CodeLattice, PauliFrame, ShotSampler};
use spinnet::{NoiseParams, RoundErrorDistribution, StabilizerType};
use std::collections::BTreeMap;

#[test]
fn lattice_invariants_all_distances() {
    for d in (3..=15).step_by(2) {
        let l = build_lattice(d).unwrap();
        assert_eq!(l.data_count(), d * d + (d - 1) * (d - 1));
        assert_eq!(l.plaquettes.len(), 2 * d * (d - 1));
        assert!(l.schedule_is_valid(), "d={d}");
        // same-type plaquettes sharing a qubit sit in different subcycles
        for (i, a) in l.plaquettes.iter().enumerate() {
            assert!((2..=4).contains(&a.weight()));
            for b in &l.plaquettes[i + 1..] {
                if a.kind == b.kind && a.support().any(|q| b.support().any(|r| r == q)) {
                    assert_ne!(a.subcycle, b.subcycle);
                }
            }
        }
        let lz = l.logical_z_pauli();
        let lx = l.logical_x_pauli();
        assert!(!lz.commutes_with(&lx));
        assert_eq!(lz.weight(), d);
        assert_eq!(lx.weight(), d);
        for i in 0..l.plaquettes.len() {
            let s = l.plaquette_pauli(i);
            assert!(s.commutes_with(&lz) && s.commutes_with(&lx));
        }
    }
}

#[test]
fn json_dump_has_schedule() {
    let v: serde_json::Value = serde_json::from_str(&build_lattice(3).unwrap().to_json()).unwrap();
    assert_eq!(v["plaquettes"].as_array().unwrap().len(), 12);
    assert!(v["plaquettes"][0]["subcycle"].is_u64());
}

fn noiseless() -> (RoundErrorDistribution, RoundErrorDistribution) {
    (RoundErrorDistribution::identity(StabilizerType::Z), RoundErrorDistribution::identity(StabilizerType::X))
}

#[test]
fn zero_noise_is_trivial() {
    let l = build_lattice(5).unwrap();
    let (dz, dx) = noiseless();
    let s = ShotSampler::new(&l, &dz, &dx).unwrap();
    let (rec, frame) = s.sample(5, &mut stream_rng(1, 0));
    assert_eq!(rec.rounds, 6);
    assert!(rec.is_trivial());
    assert!(frame.is_empty());
}

#[test]
fn single_z_fires_two_x_plaquettes() {
    let l = build_lattice(5).unwrap();
    // a bulk Z plaquette
    let target = l
        .plaquettes
        .iter()
        .position(|p| p.kind == StabilizerType::Z && p.weight() == 4 && p.site.0 >= 3)
        .unwrap();
    let north = l.plaquettes[target].slots[0].unwrap();
    let s = ShotSampler::per_plaquette(&l, |i| {
        if i == target {
            RoundErrorDistribution::delta(StabilizerType::Z, "ZIII", false).unwrap()
        } else {
            RoundErrorDistribution::identity(l.plaquettes[i].kind)
        }
    })
    .unwrap();
    let (rec, frame) = s.sample(1, &mut stream_rng(3, 0));
    let fired: Vec<usize> = (0..l.plaquettes.len()).filter(|&i| rec.get(0, i) == 1).collect();
    assert_eq!(fired.len(), 2);
    for &i in &fired {
        let p = &l.plaquettes[i];
        assert_eq!(p.kind, StabilizerType::X);
        assert!(p.subcycle > l.plaquettes[target].subcycle);
        assert!(p.support().any(|q| q == north));
    }
    assert_eq!(rec.round(1), rec.round(0));
    let mut expect = PauliFrame::new(l.data_count());
    expect.flip_z(north);
    assert_eq!(frame, expect);
}

/// Exact per-detector firing probability: every draw (plaquette, round)
/// toggles a detector with some probability q, draws are independent, so a
/// detector fires with probability (1 − Π(1 − 2q)) / 2.
fn detector_oracle(l: &CodeLattice, dz: &RoundErrorDistribution, dx: &RoundErrorDistribution, rounds: usize) -> f64 {
    let np = l.plaquettes.len();
    let det = |p: usize, r: usize| r * np + p;
    let mut keep_one = vec![1.0f64; (rounds + 1) * np];
    for t in 0..rounds {
        for (pi, p) in l.plaquettes.iter().enumerate() {
            let dist = if p.kind == StabilizerType::Z { dz } else { dx };
            let mut toggle: BTreeMap<usize, f64> = BTreeMap::new();
            for (e, &prob) in dist.dense().iter().enumerate() {
                if prob == 0.0 {
                    continue;
                }
                let (x, z, flip) = effect_parts(e);
                let mut hit: BTreeMap<usize, bool> = BTreeMap::new();
                if flip {
                    *hit.entry(det(pi, t)).or_default() ^= true;
                    *hit.entry(det(pi, t + 1)).or_default() ^= true;
                }
                for k in 0..4 {
                    let Some(q) = p.slots[k] else { continue };
                    for (bit, sees) in [((x >> k) & 1, StabilizerType::Z), ((z >> k) & 1, StabilizerType::X)] {
                        if bit == 0 {
                            continue;
                        }
                        for (oi, o) in l.plaquettes.iter().enumerate() {
                            if o.kind == sees && o.support().any(|r| r == q) {
                                let r0 = if o.subcycle > p.subcycle { t } else { t + 1 };
                                *hit.entry(det(oi, r0)).or_default() ^= true;
                            }
                        }
                    }
                }
                for (k, on) in hit {
                    if on {
                        *toggle.entry(k).or_default() += prob;
                    }
                }
            }
            for (k, q) in toggle {
                keep_one[k] *= 1.0 - 2.0 * q;
            }
        }
    }
    keep_one.iter().map(|v| 0.5 * (1.0 - v)).sum::<f64>() / keep_one.len() as f64
}

#[test]
fn shuttle_defect_density_matches_oracle() {
    let n = NoiseParams::new(0.0, 0.0, 0.0079);
    let dz = extract_round_distribution(StabilizerType::Z, &n).unwrap();
    let dx = extract_round_distribution(StabilizerType::X, &n).unwrap();
    let l = build_lattice(5).unwrap();
    let rounds = 5;
    let expect = detector_oracle(&l, &dz, &dx, rounds);
    let s = ShotSampler::new(&l, &dz, &dx).unwrap();
    let shots = 100_000u64;
    let mut defects = 0u64;
    for shot in 0..shots {
        let (rec, _) = s.sample(rounds, &mut stream_rng(2024, substream(9, shot)));
        for p in 0..rec.plaquettes {
            let mut prev = 0;
            for r in 0..rec.rounds {
                defects += (rec.get(r, p) != prev) as u64;
                prev = rec.get(r, p);
            }
        }
    }
    let density = defects as f64 / (shots as f64 * ((rounds + 1) * l.plaquettes.len()) as f64);
    let rel = (density - expect).abs() / expect;
    println!("defect density {density:.6e}, oracle {expect:.6e}, rel {rel:.2e}");
    assert!(rel < 0.05);
}

#[test]
fn sampling_is_deterministic() {
    let n = NoiseParams::new(1e-3, 1e-2, 1e-2);
    let dz = extract_round_distribution(StabilizerType::Z, &n).unwrap();
    let dx = extract_round_distribution(StabilizerType::X, &n).unwrap();
    let l = build_lattice(3).unwrap();
    let s = ShotSampler::new(&l, &dz, &dx).unwrap();
    for shot in 0..20 {
        let a = s.sample(3, &mut stream_rng(5, substream(1, shot)));
        let b = s.sample(3, &mut stream_rng(5, substream(1, shot)));
        assert_eq!(a, b);
    }
}

#[test]
fn rejects_swapped_distributions() {
    let l = build_lattice(3).unwrap();
    let (dz, dx) = noiseless();
    assert!(ShotSampler::new(&l, &dx, &dz).is_err());
}

fn frame_strategy(n: usize) -> impl Strategy<Value = PauliFrame> {
    proptest::collection::vec(0u8..4, n).prop_map(move |v| {
        let mut f = PauliFrame::new(n);
        for (q, l) in v.into_iter().enumerate() {
            if l & 1 == 1 {
                f.flip_x(q);
            }
            if l & 2 == 2 {
                f.flip_z(q);
            }
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_composition_is_xor(a in frame_strategy(85), b in frame_strategy(85)) {
        let ab = a.compose(&b);
        prop_assert_eq!(ab.compose(&b), a.clone());
        prop_assert_eq!(ab, b.compose(&a));
        // composition matches the Pauli product up to phase
        let prod = a.to_pauli().mul(&b.to_pauli()).unsigned();
        prop_assert_eq!(PauliFrame::from_pauli(&prod), a.compose(&b));
    }

    #[test]
    fn final_round_matches_frame(seed in any::<u64>(), d in prop_oneof![Just(3usize), Just(5), Just(7)]) {
        let n = NoiseParams::new(5e-3, 3e-2, 2e-2);
        let dz = extract_round_distribution(StabilizerType::Z, &n).unwrap();
        let dx = extract_round_distribution(StabilizerType::X, &n).unwrap();
        let l = build_lattice(d).unwrap();
        let s = ShotSampler::new(&l, &dz, &dx).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (rec, frame) = s.sample(d, &mut rng);
        prop_assert_eq!(l.syndrome(&frame), rec.round(d).to_vec());
    }

    #[test]
    fn stabilizer_products_never_fail(mask in proptest::collection::vec(any::<bool>(), 40)) {
        let l = build_lattice(5).unwrap();
        let mut f = PauliFrame::new(l.data_count());
        for (i, on) in mask.into_iter().enumerate().take(l.plaquettes.len()) {
            if on {
                f = f.compose(&PauliFrame::from_pauli(&l.plaquette_pauli(i)));
            }
        }
        prop_assert_eq!(logical_failure(&l, &f).unwrap(), (false, false));
    }
}
