use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use spinnet::decoder::{mwpm_decode, DetectionGraph, Decoder};
use spinnet::rng::{stream_rng, substream};
use spinnet::stabilizer_protocol::extract_round_distribution;
use spinnet::surface_code::{build_lattice, logical_failure, CodeLattice, PauliFrame, ShotSampler};
use spinnet::{NoiseParams, RoundErrorDistribution, StabilizerType};

fn dists(n: &NoiseParams) -> (RoundErrorDistribution, RoundErrorDistribution) {
    (
        extract_round_distribution(StabilizerType::Z, n).unwrap(),
        extract_round_distribution(StabilizerType::X, n).unwrap(),
    )
}

/// Exhaustive minimum over all pairings where any defect may instead go to
/// the boundary.
fn exhaustive(g: &DetectionGraph) -> Option<i64> {
    fn rec(g: &DetectionGraph, used: &mut Vec<bool>) -> Option<i64> {
        let Some(i) = used.iter().position(|u| !u) else { return Some(0) };
        used[i] = true;
        let mut best: Option<i64> = None;
        if let Some(b) = g.boundary[i] {
            if let Some(r) = rec(g, used) {
                best = Some(b + r);
            }
        }
        for j in i + 1..used.len() {
            if used[j] {
                continue;
            }
            let Some(w) = g.pair_weight(i, j) else { continue };
            used[j] = true;
            if let Some(r) = rec(g, used) {
                best = Some(best.map_or(w + r, |b| b.min(w + r)));
            }
            used[j] = false;
        }
        used[i] = false;
        best
    }
    rec(g, &mut vec![false; g.defects.len()])
}

fn single_fault_sampler<'a>(l: &'a CodeLattice, target: usize, label: &str, flip: bool) -> ShotSampler<'a> {
    ShotSampler::per_plaquette(l, |i| {
        if i == target {
            RoundErrorDistribution::delta(l.plaquettes[i].kind, label, flip).unwrap()
        } else {
            RoundErrorDistribution::identity(l.plaquettes[i].kind)
        }
    })
    .unwrap()
}

#[test]
fn single_data_error_gives_two_defects_and_is_undone() {
    let l = build_lattice(5).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(1e-3, 1e-2, 1e-2));
    let dec = Decoder::new(&l, &dz, &dx, 5).unwrap();
    let target = l.plaquettes.iter().position(|p| p.kind == StabilizerType::Z && p.weight() == 4 && p.site.0 >= 3).unwrap();
    let q = l.plaquettes[target].slots[0].unwrap();
    // a one-round error, then silence: run the sampler for one noisy round
    // and pad with quiet rounds by reusing its final value
    let s = single_fault_sampler(&l, target, "ZIII", false);
    let (rec1, frame) = s.sample(1, &mut stream_rng(0, 0));
    let mut rec = spinnet::surface_code::SyndromeRecord::new(6, l.plaquettes.len());
    for r in 0..6 {
        for p in 0..l.plaquettes.len() {
            rec.set(r, p, rec1.get(r.min(1), p));
        }
    }
    let g = dec.x_graph.detection_graph(&rec).unwrap();
    assert_eq!(g.defects.len(), 2);
    assert_eq!(g.edges.len(), 1);
    assert!(dec.z_graph.detection_graph(&rec).unwrap().is_empty());
    let m = mwpm_decode(&g).unwrap();
    let mut expect = PauliFrame::new(l.data_count());
    expect.flip_z(q);
    assert_eq!(m.correction, expect);
    assert_eq!(m.correction, frame);
}

#[test]
fn single_flip_gives_time_like_pair() {
    let l = build_lattice(3).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(1e-3, 1e-2, 1e-2));
    let dec = Decoder::new(&l, &dz, &dx, 1).unwrap();
    let target = l.plaquettes_of(StabilizerType::Z)[2];
    let s = single_fault_sampler(&l, target, "IIII", true);
    let (rec, frame) = s.sample(1, &mut stream_rng(0, 0));
    assert!(frame.is_empty());
    let g = dec.z_graph.detection_graph(&rec).unwrap();
    let locs: Vec<(usize, usize)> = g.defects.iter().map(|&v| dec.z_graph.locate(v)).collect();
    assert_eq!(locs, vec![(0, target), (1, target)]);
    let m = mwpm_decode(&g).unwrap();
    assert_eq!(m.pairs, vec![(0, Some(1))]);
    assert!(m.correction.is_empty());
}

#[test]
fn every_single_data_error_is_corrected() {
    let l = build_lattice(5).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(1e-3, 1e-2, 1e-3));
    let dec = Decoder::new(&l, &dz, &dx, 2).unwrap();
    for q in 0..l.data_count() {
        for x in [true, false] {
            let mut e = PauliFrame::new(l.data_count());
            if x {
                e.flip_x(q);
            } else {
                e.flip_z(q);
            }
            // error appears between rounds 0 and 1
            let mut rec = spinnet::surface_code::SyndromeRecord::new(3, l.plaquettes.len());
            for (p, b) in l.syndrome(&e).into_iter().enumerate() {
                rec.set(1, p, b);
                rec.set(2, p, b);
            }
            let c = dec.decode(&rec).unwrap();
            assert_eq!(logical_failure(&l, &e.compose(&c)).unwrap(), (false, false), "qubit {q}");
        }
    }
}

#[test]
fn matching_weight_equals_exhaustive_minimum() {
    let l = build_lattice(3).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(2e-3, 1e-2, 1e-2));
    let dec = Decoder::new(&l, &dz, &dx, 3).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let kind = if case % 2 == 0 { StabilizerType::Z } else { StabilizerType::X };
        let space = dec.graph(kind);
        let k = rng.gen_range(1..=10);
        let nodes: Vec<usize> = rand::seq::index::sample(&mut rng, space.node_count(), k).into_vec();
        let g = space.detection_graph_from_nodes(nodes);
        let m = mwpm_decode(&g).unwrap();
        assert_eq!(Some(m.weight), exhaustive(&g), "case {case}");
    }
}

#[test]
fn eight_defect_instances_without_boundary_ties() {
    // sampled histories at high noise, keeping instances with exactly eight
    // defects
    let l = build_lattice(3).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(5e-3, 4e-2, 2e-2));
    let dec = Decoder::new(&l, &dz, &dx, 3).unwrap();
    let s = ShotSampler::new(&l, &dz, &dx).unwrap();
    let mut seen = 0;
    let mut shot = 0;
    while seen < 100 {
        let (rec, _) = s.sample(3, &mut stream_rng(8, shot));
        shot += 1;
        for kind in [StabilizerType::Z, StabilizerType::X] {
            let g = dec.graph(kind).detection_graph(&rec).unwrap();
            if g.defects.len() == 8 {
                seen += 1;
                assert_eq!(Some(mwpm_decode(&g).unwrap().weight), exhaustive(&g));
            }
        }
    }
}

#[test]
fn corrections_always_reach_codespace() {
    let l = build_lattice(3).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(1e-4, 1e-3, 1e-3));
    let dec = Decoder::new(&l, &dz, &dx, 3).unwrap();
    let s = ShotSampler::new(&l, &dz, &dx).unwrap();
    let shots = 1_000_000u64;
    let failures: u64 = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let (rec, frame) = s.sample(3, &mut stream_rng(99, substream(2, shot)));
            let c = dec.decode(&rec).unwrap();
            let (fz, fx) = logical_failure(&l, &frame.compose(&c)).expect("codespace");
            (fz || fx) as u64
        })
        .sum();
    println!("{failures} logical failures in {shots} shots");
    assert!(failures > 0 && failures < shots / 20);
}

#[test]
fn decoding_is_deterministic() {
    let l = build_lattice(5).unwrap();
    let (dz, dx) = dists(&NoiseParams::new(2e-3, 2e-2, 1e-2));
    let dec = Decoder::new(&l, &dz, &dx, 5).unwrap();
    let s = ShotSampler::new(&l, &dz, &dx).unwrap();
    for shot in 0..200 {
        let (rec, _) = s.sample(5, &mut stream_rng(4, shot));
        assert_eq!(dec.decode(&rec).unwrap(), dec.decode(&rec).unwrap());
    }
}
