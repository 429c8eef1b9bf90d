//! Minimum-weight perfect matching decoding of space-time syndrome histories.
//!
//! Each stabilizer type gets its own graph. Nodes are detectors
//! `(plaquette, round)`; a detector fires when a plaquette's reported value
//! differs from the previous round (round −1 reads 0). Edges are single-fault
//! mechanisms obtained from the per-round distributions:
//!
//! * a data residue on one qubit (single-qubit marginal of the draw) fires the
//!   one or two detecting plaquettes, in the current round if they are
//!   scheduled later in the cycle and in the next round otherwise; a single
//!   endpoint becomes an edge to the boundary;
//! * a syndrome flip fires the same plaquette in two consecutive rounds.
//!
//! Correlated residues are split into their single-qubit marginals, and the
//! two types are decoded independently. Weights are `ln((1−p)/p)` in integer
//! milli-units. Shortest paths (never through the boundary) are tabulated
//! once per graph. Per shot the defects, sorted by `(round, plaquette)`, are
//! matched with boundary copies on a candidate set of pairs and the blossom
//! solver; equal-weight ties resolve by that order.

pub mod blossom;

use crate::stabilizer_protocol::{effect_parts, RoundErrorDistribution, StabilizerType};
use crate::surface_code::{CodeLattice, PauliFrame, SurfaceError, SyndromeRecord};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

/// Weight units per neper.
pub const WEIGHT_SCALE: f64 = 1000.0;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("record has {got} rounds, decoder built for {expected}")]
    Rounds { expected: usize, got: usize },
    #[error("no perfect matching for {0} defects")]
    Infeasible(usize),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    a: usize,
    /// `usize::MAX` for the boundary
    b: usize,
    qubit: Option<usize>,
    weight: i64,
    prob: f64,
}

const BOUNDARY: usize = usize::MAX;

fn weight_of(p: f64) -> i64 {
    let p = p.min(0.5 - 1e-12);
    ((WEIGHT_SCALE * ((1.0 - p) / p).ln()).round() as i64).max(1)
}

/// Static matching graph for one stabilizer type.
pub struct SpaceTimeGraph {
    kind: StabilizerType,
    /// global plaquette index of each local index
    plaquettes: Vec<usize>,
    /// detector rounds: noisy rounds + 1
    layers: usize,
    edges: Vec<Edge>,
    /// `dist[s * (n + 1) + v]`, column `n` is the boundary; `i64::MAX` if
    /// unreachable
    dist: Vec<i64>,
    /// edge used to enter `v` on the shortest path from `s`
    pred: Vec<u32>,
    data_count: usize,
}

impl SpaceTimeGraph {
    pub fn new(
        lattice: &CodeLattice,
        kind: StabilizerType,
        dist_z: &RoundErrorDistribution,
        dist_x: &RoundErrorDistribution,
        rounds: usize,
    ) -> Result<Self, SurfaceError> {
        for (want, d) in [(StabilizerType::Z, dist_z), (StabilizerType::X, dist_x)] {
            if d.stabilizer_type() != want {
                return Err(SurfaceError::DistributionType { expected: want, got: d.stabilizer_type() });
            }
        }
        let plaquettes = lattice.plaquettes_of(kind);
        let mut local = vec![usize::MAX; lattice.plaquettes.len()];
        for (l, &g) in plaquettes.iter().enumerate() {
            local[g] = l;
        }
        let np = plaquettes.len();
        let layers = rounds + 1;
        let n = np * layers;
        let node = |p: usize, r: usize| r * np + local[p];

        // detecting plaquettes per data qubit
        let mut watchers = vec![Vec::new(); lattice.data_count()];
        for &g in &plaquettes {
            for q in lattice.plaquettes[g].support() {
                watchers[q].push(g);
            }
        }
        // x bits are seen by Z plaquettes, z bits by X plaquettes
        let bit_shift = if kind == StabilizerType::Z { 0 } else { 4 };

        let mut merged: BTreeMap<(usize, usize, Option<usize>), f64> = BTreeMap::new();
        let mut add = |a: usize, b: usize, q: Option<usize>, p: f64| {
            if p <= 0.0 {
                return;
            }
            let key = if b != BOUNDARY && b < a { (b, a, q) } else { (a, b, q) };
            let e = merged.entry(key).or_insert(0.0);
            *e = *e * (1.0 - p) + p * (1.0 - *e);
        };
        for (gi, pl) in lattice.plaquettes.iter().enumerate() {
            let dist = if pl.kind == StabilizerType::Z { dist_z } else { dist_x };
            let mut slot_p = [0.0f64; 4];
            let mut flip_p = 0.0;
            for (e, &p) in dist.dense().iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                for (k, sp) in slot_p.iter_mut().enumerate() {
                    if (e >> (bit_shift + k)) & 1 == 1 {
                        *sp += p;
                    }
                }
                if effect_parts(e).2 {
                    flip_p += p;
                }
            }
            for t in 0..rounds {
                for (k, slot) in pl.slots.iter().enumerate() {
                    let Some(q) = *slot else { continue };
                    let hits: Vec<usize> = watchers[q]
                        .iter()
                        .map(|&o| {
                            let r0 = if lattice.plaquettes[o].subcycle > pl.subcycle { t } else { t + 1 };
                            node(o, r0)
                        })
                        .collect();
                    match hits.as_slice() {
                        [a] => add(*a, BOUNDARY, Some(q), slot_p[k]),
                        [a, b] => add(*a, *b, Some(q), slot_p[k]),
                        _ => unreachable!("a data qubit has one or two same-type plaquettes"),
                    }
                }
                if pl.kind == kind {
                    add(node(gi, t), node(gi, t + 1), None, flip_p);
                }
            }
        }
        // parallel mechanisms with different qubits: keep the likelier qubit
        let mut by_pair: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
        for ((a, b, q), p) in merged {
            match by_pair.get_mut(&(a, b)) {
                Some(e) => {
                    if p > e.prob {
                        e.qubit = q;
                    }
                    e.prob = e.prob * (1.0 - p) + p * (1.0 - e.prob);
                }
                None => {
                    by_pair.insert((a, b), Edge { a, b, qubit: q, weight: 0, prob: p });
                }
            }
        }
        let mut edges: Vec<Edge> = by_pair.into_values().collect();
        for e in edges.iter_mut() {
            e.weight = weight_of(e.prob);
        }

        let mut g = SpaceTimeGraph {
            kind,
            plaquettes,
            layers,
            edges,
            dist: Vec::new(),
            pred: Vec::new(),
            data_count: lattice.data_count(),
        };
        g.tabulate(n);
        Ok(g)
    }

    fn tabulate(&mut self, n: usize) {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (k, e) in self.edges.iter().enumerate() {
            if e.b == BOUNDARY {
                adj[e.a].push((n, k));
            } else {
                adj[e.a].push((e.b, k));
                adj[e.b].push((e.a, k));
            }
        }
        let w = n + 1;
        self.dist = vec![i64::MAX; n * w];
        self.pred = vec![u32::MAX; n * w];
        for s in 0..n {
            let dist = &mut self.dist[s * w..(s + 1) * w];
            let pred = &mut self.pred[s * w..(s + 1) * w];
            let mut heap = BinaryHeap::new();
            dist[s] = 0;
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, v))) = heap.pop() {
                if d > dist[v] || v == n {
                    continue;
                }
                for &(u, k) in &adj[v] {
                    let nd = d + self.edges[k].weight;
                    if nd < dist[u] {
                        dist[u] = nd;
                        pred[u] = k as u32;
                        heap.push(Reverse((nd, u)));
                    }
                }
            }
        }
    }

    pub fn kind(&self) -> StabilizerType {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.plaquettes.len() * self.layers
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node of global plaquette `p` at detector round `r`.
    pub fn node(&self, p: usize, r: usize) -> Option<usize> {
        let l = self.plaquettes.iter().position(|&g| g == p)?;
        (r < self.layers).then(|| r * self.plaquettes.len() + l)
    }

    /// `(round, global plaquette)` of a node.
    pub fn locate(&self, node: usize) -> (usize, usize) {
        let np = self.plaquettes.len();
        (node / np, self.plaquettes[node % np])
    }

    /// Shortest-path weight between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> Option<i64> {
        let d = self.dist[a * (self.node_count() + 1) + b];
        (d != i64::MAX).then_some(d)
    }

    /// Shortest-path weight from a node to the boundary.
    pub fn boundary_distance(&self, a: usize) -> Option<i64> {
        self.distance(a, self.node_count())
    }

    /// Detectors fired by a record, sorted by `(round, plaquette)`.
    pub fn defects(&self, record: &SyndromeRecord) -> Vec<usize> {
        let np = self.plaquettes.len();
        let mut out = Vec::new();
        for r in 0..self.layers {
            for (l, &g) in self.plaquettes.iter().enumerate() {
                let prev = if r == 0 { 0 } else { record.get(r - 1, g) };
                if record.get(r, g) != prev {
                    out.push(r * np + l);
                }
            }
        }
        out
    }

    pub fn detection_graph(&self, record: &SyndromeRecord) -> Result<DetectionGraph<'_>, DecodeError> {
        if record.rounds != self.layers {
            return Err(DecodeError::Rounds { expected: self.layers, got: record.rounds });
        }
        Ok(self.detection_graph_from_nodes(self.defects(record)))
    }

    /// Graph over an explicit defect set (sorted internally).
    pub fn detection_graph_from_nodes(&self, mut defects: Vec<usize>) -> DetectionGraph<'_> {
        defects.sort_unstable();
        defects.dedup();
        let boundary: Vec<Option<i64>> = defects.iter().map(|&v| self.boundary_distance(v)).collect();
        let mut edges = Vec::new();
        for i in 0..defects.len() {
            for j in i + 1..defects.len() {
                let Some(d) = self.distance(defects[i], defects[j]) else { continue };
                let useful = match (boundary[i], boundary[j]) {
                    (Some(a), Some(b)) => d < a + b,
                    _ => true,
                };
                if useful {
                    edges.push((i, j, d));
                }
            }
        }
        DetectionGraph { space: self, defects, boundary, edges }
    }

    /// XOR of the data qubits along the shortest path `a → b` (`b` may be
    /// the boundary column).
    fn path_qubits(&self, a: usize, b: usize, out: &mut PauliFrame) {
        let n = self.node_count();
        let w = n + 1;
        let mut v = b;
        while v != a {
            let k = self.pred[a * w + v] as usize;
            let e = &self.edges[k];
            if let Some(q) = e.qubit {
                match self.kind {
                    StabilizerType::Z => out.flip_x(q),
                    StabilizerType::X => out.flip_z(q),
                }
            }
            v = if v == n || e.b == v { e.a } else { e.b };
        }
    }
}

/// Fired detectors of one shot with their candidate pairings.
pub struct DetectionGraph<'a> {
    space: &'a SpaceTimeGraph,
    /// node ids sorted by (round, plaquette)
    pub defects: Vec<usize>,
    /// shortest-path weight to the boundary per defect
    pub boundary: Vec<Option<i64>>,
    /// `(i, j, weight)` over defect indices, only where pairing can beat
    /// sending both to the boundary
    pub edges: Vec<(usize, usize, i64)>,
}

impl DetectionGraph<'_> {
    pub fn space(&self) -> &SpaceTimeGraph {
        self.space
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    /// Shortest-path weight between defects `i` and `j`.
    pub fn pair_weight(&self, i: usize, j: usize) -> Option<i64> {
        self.space.distance(self.defects[i], self.defects[j])
    }
}

/// Matching result: pairs over defect indices (`None` partner = boundary).
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, Option<usize>)>,
    pub weight: i64,
    pub correction: PauliFrame,
}

/// Minimum-weight perfect matching of the defects with boundary copies.
pub fn mwpm_decode(graph: &DetectionGraph) -> Result<Matching, DecodeError> {
    let n = graph.defects.len();
    let space = graph.space;
    let mut correction = PauliFrame::new(space.data_count);
    if n == 0 {
        return Ok(Matching { pairs: Vec::new(), weight: 0, correction });
    }
    // vertices: defect i, boundary copy n + i
    let mut full: Vec<(usize, usize, i64)> = Vec::new();
    for (i, b) in graph.boundary.iter().enumerate() {
        if let Some(b) = b {
            full.push((i, n + i, *b));
        }
    }
    for &(i, j, w) in &graph.edges {
        full.push((i, j, w));
        if graph.boundary[i].is_some() && graph.boundary[j].is_some() {
            full.push((n + i, n + j, 0));
        }
    }
    // connected components, solved separately
    let mut comp: Vec<usize> = (0..2 * n).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        let mut y = x;
        while c[y] != r {
            let nx = c[y];
            c[y] = r;
            y = nx;
        }
        r
    }
    for &(a, b, _) in &full {
        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
        if ra != rb {
            comp[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..2 * n {
        let r = find(&mut comp, v);
        groups.entry(r).or_default().push(v);
    }
    let mut mate = vec![None; 2 * n];
    for verts in groups.values() {
        if verts.len() == 1 {
            continue;
        }
        let mut local = BTreeMap::new();
        for (l, &v) in verts.iter().enumerate() {
            local.insert(v, l);
        }
        let sub: Vec<(usize, usize, i64)> =
            full.iter().filter(|e| local.contains_key(&e.0)).map(|e| (local[&e.0], local[&e.1], e.2)).collect();
        let big = sub.iter().map(|e| e.2).max().unwrap() + 1;
        let inv: Vec<(usize, usize, i64)> = sub.iter().map(|&(a, b, w)| (a, b, big - w)).collect();
        let m = blossom::max_weight_matching(verts.len(), &inv, true);
        for (l, ml) in m.into_iter().enumerate() {
            mate[verts[l]] = ml.map(|x| verts[x]);
        }
    }
    let mut pairs = Vec::new();
    let mut weight = 0;
    for i in 0..n {
        match mate[i] {
            Some(j) if j == n + i => {
                pairs.push((i, None));
                weight += graph.boundary[i].unwrap();
                space.path_qubits(graph.defects[i], space.node_count(), &mut correction);
            }
            Some(j) if j < n => {
                if i < j {
                    pairs.push((i, Some(j)));
                    weight += graph.pair_weight(i, j).unwrap();
                    space.path_qubits(graph.defects[i], graph.defects[j], &mut correction);
                }
            }
            _ => return Err(DecodeError::Infeasible(n)),
        }
    }
    Ok(Matching { pairs, weight, correction })
}

/// Both matching graphs for a lattice, noise point and round count.
pub struct Decoder {
    pub z_graph: SpaceTimeGraph,
    pub x_graph: SpaceTimeGraph,
}

impl Decoder {
    pub fn new(
        lattice: &CodeLattice,
        dist_z: &RoundErrorDistribution,
        dist_x: &RoundErrorDistribution,
        rounds: usize,
    ) -> Result<Self, SurfaceError> {
        Ok(Decoder {
            z_graph: SpaceTimeGraph::new(lattice, StabilizerType::Z, dist_z, dist_x, rounds)?,
            x_graph: SpaceTimeGraph::new(lattice, StabilizerType::X, dist_z, dist_x, rounds)?,
        })
    }

    pub fn graph(&self, kind: StabilizerType) -> &SpaceTimeGraph {
        match kind {
            StabilizerType::Z => &self.z_graph,
            StabilizerType::X => &self.x_graph,
        }
    }

    /// Correction frame for a full record (both types).
    pub fn decode(&self, record: &SyndromeRecord) -> Result<PauliFrame, DecodeError> {
        let mz = mwpm_decode(&self.z_graph.detection_graph(record)?)?;
        let mx = mwpm_decode(&self.x_graph.detection_graph(record)?)?;
        Ok(mz.correction.compose(&mx.correction))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_code::build_lattice;

    #[test]
    fn weights_are_positive_and_monotone() {
        assert!(weight_of(1e-4) > weight_of(1e-3));
        assert_eq!(weight_of(0.6), 1);
    }

    #[test]
    fn empty_record_decodes_to_nothing() {
        let l = build_lattice(3).unwrap();
        let dz = RoundErrorDistribution::identity(StabilizerType::Z);
        let dx = RoundErrorDistribution::identity(StabilizerType::X);
        let dec = Decoder::new(&l, &dz, &dx, 3).unwrap();
        let rec = SyndromeRecord::new(4, l.plaquettes.len());
        assert!(dec.decode(&rec).unwrap().is_empty());
        assert!(dec.z_graph.detection_graph(&rec).unwrap().is_empty());
    }
}
