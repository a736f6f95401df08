//! Radius graphs over an ε-sample, clearance attachment, pruning and modes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fivebar::{output_sing_values, CanonicalDesign, Configuration};
use crate::math;
use crate::sampler::EpsilonSample;
use crate::singdist::{lipschitz_lower_bound, witness_upper_bound, SingularityDistance, SubResult};
use crate::spatial::HashGrid;
use crate::AMBIENT_DIM;

/// Sign labels with `|h|` below this are filled in from a neighbour.
pub const SIGN_TOL: f64 = 1e-9;

/// Components with fewer nodes are reported as debris, not modes.
pub const MIN_MODE_SIZE: usize = 5;

/// Failure fraction above which a clearance result is not trusted.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

/// Connection radius `r(ε) = 4ε √(2n / (n + 1))` for `n = 6`.
pub fn radius_for(epsilon: f64) -> f64 {
    let n = AMBIENT_DIM as f64;
    4.0 * epsilon * math::sqrt(2.0 * n / (n + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ClearanceKind {
    /// Not computed yet.
    Unknown = 0,
    /// Solved exactly.
    Exact = 1,
    /// Only a certified lower bound is known, and it clears the threshold.
    LowerBound = 2,
    /// A point of `I` is known to be closer than the threshold.
    UpperBound = 3,
    /// The solver lost too many paths; the edge is never used.
    Failed = 4,
}

impl ClearanceKind {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => ClearanceKind::Unknown,
            1 => ClearanceKind::Exact,
            2 => ClearanceKind::LowerBound,
            3 => ClearanceKind::UpperBound,
            4 => ClearanceKind::Failed,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
    /// Best available clearance value: exact, or the bound that decided it.
    pub clearance: f64,
    /// Certified bounds on the true clearance.
    pub lower: f64,
    pub upper: f64,
    pub kind: ClearanceKind,
}

impl Edge {
    fn new(a: u32, b: u32, weight: f64) -> Self {
        Edge {
            a,
            b,
            weight,
            clearance: f64::NAN,
            lower: 0.0,
            upper: f64::INFINITY,
            kind: ClearanceKind::Unknown,
        }
    }

    /// Whether the edge is certified to keep clearance `threshold`.
    pub fn clears(&self, threshold: f64) -> bool {
        match self.kind {
            ClearanceKind::Unknown | ClearanceKind::Failed => false,
            _ => self.lower >= threshold,
        }
    }

    pub fn other(&self, v: u32) -> u32 {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Clearance of a single node plus the critical points that produced it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeClearance {
    pub distance: f64,
    pub flagged: bool,
    pub critical: SubResult,
}

impl NodeClearance {
    pub fn from_result(critical: SubResult) -> Self {
        let failed = critical.paths > 0
            && critical.failed as f64 > MAX_FAILURE_FRACTION * critical.paths as f64;
        NodeClearance {
            distance: critical.min_distance(),
            flagged: failed,
            critical,
        }
    }

    /// Known points of `I`.
    pub fn witnesses(&self) -> impl Iterator<Item = &[f64; 6]> {
        self.critical.points.iter().map(|p| &p.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeClearance {
    pub distance: f64,
    pub flagged: bool,
}

/// Source of node and segment clearances.
pub trait ClearanceBackend {
    fn node(&self, z: &[f64; 6]) -> NodeClearance;
    fn edge(&self, z0: &[f64; 6], z1: &[f64; 6], n0: &NodeClearance, n1: &NodeClearance) -> EdgeClearance;
}

impl ClearanceBackend for SingularityDistance {
    fn node(&self, z: &[f64; 6]) -> NodeClearance {
        NodeClearance::from_result(self.point(z))
    }

    fn edge(&self, z0: &[f64; 6], z1: &[f64; 6], n0: &NodeClearance, n1: &NodeClearance) -> EdgeClearance {
        let q = self.segment_with(z0, z1, Some(n0.critical.clone()), Some(n1.critical.clone()));
        EdgeClearance {
            distance: q.distance(),
            flagged: q.flagged(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigGraph {
    pub design: CanonicalDesign,
    pub epsilon: f64,
    pub wfs: Option<f64>,
    pub radius: f64,
    pub threshold: f64,
    pub configs: Vec<[f64; 6]>,
    pub branches: Vec<i8>,
    /// `(h1, h2)` per node.
    pub output_values: Vec<[f64; 2]>,
    /// Sign labels of `(h1, h2)`, each `±1`.
    pub signs: Vec<[i8; 2]>,
    /// Node clearances; `NaN` until attached.
    pub node_clearance: Vec<f64>,
    pub node_flagged: Vec<bool>,
    pub edges: Vec<Edge>,
}

/// All index pairs `i < j` with `‖p_i − p_j‖ ≤ r`, sorted.
pub fn radius_pairs(points: &[[f64; 6]], r: f64) -> Vec<(u32, u32, f64)> {
    let mut grid = HashGrid::<6>::new(r);
    for (i, p) in points.iter().enumerate() {
        grid.insert(p, i as u32);
    }
    let r2 = r * r;
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let start = out.len();
        grid.for_each_candidate(p, |j| {
            if (j as usize) > i {
                let d2 = math::dist2(p, &points[j as usize]);
                if d2 <= r2 {
                    out.push((i as u32, j, math::sqrt(d2)));
                }
            }
        });
        out[start..].sort_unstable_by_key(|e| e.1);
    }
    out
}

impl ConfigGraph {
    /// Radius graph at `r(ε)` over the sample, with threshold initialised to `r`.
    pub fn build(d: &CanonicalDesign, sample: &EpsilonSample) -> Result<Self> {
        let mut g = Self::nodes_only(d, sample)?;
        g.connect();
        Ok(g)
    }

    /// The sample's nodes and labels without any edges.
    pub fn nodes_only(d: &CanonicalDesign, sample: &EpsilonSample) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let configs = sample.arrays();
        let r = radius_for(sample.epsilon);
        let output_values: Vec<[f64; 2]> = configs
            .iter()
            .map(|c| {
                let (h1, h2) = output_sing_values(d, &Configuration::from_array(*c));
                [h1, h2]
            })
            .collect();
        let n = configs.len();
        let mut g = ConfigGraph {
            design: *d,
            epsilon: sample.epsilon,
            wfs: sample.wfs,
            radius: r,
            threshold: r,
            configs,
            branches: sample.branches.clone(),
            output_values,
            signs: Vec::new(),
            node_clearance: vec![f64::NAN; n],
            node_flagged: vec![false; n],
            edges: Vec::new(),
        };
        g.signs = g.fill_signs();
        Ok(g)
    }

    /// Replaces the edge set by all pairs within `radius`, clearances reset.
    pub fn connect(&mut self) {
        self.edges = radius_pairs(&self.configs, self.radius)
            .into_iter()
            .map(|(a, b, w)| Edge::new(a, b, w))
            .collect();
        self.signs = self.fill_signs();
    }

    pub fn num_nodes(&self) -> usize {
        self.configs.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Per-node incident edge indices.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.a as usize].push(k as u32);
            adj[e.b as usize].push(k as u32);
        }
        adj
    }

    /// Signs of `(h1, h2)`; near-zero values copy the nearest labelled node.
    fn fill_signs(&self) -> Vec<[i8; 2]> {
        let n = self.num_nodes();
        let adj = self.adjacency();
        let mut out = vec![[0i8; 2]; n];
        for k in 0..2 {
            let sure: Vec<bool> = self
                .output_values
                .iter()
                .map(|h| math::abs(h[k]) >= SIGN_TOL)
                .collect();
            for i in 0..n {
                if sure[i] {
                    out[i][k] = if self.output_values[i][k] > 0.0 { 1 } else { -1 };
                    continue;
                }
                let mut best: Option<(f64, usize)> = adj[i]
                    .iter()
                    .map(|&e| {
                        let j = self.edges[e as usize].other(i as u32) as usize;
                        (self.edges[e as usize].weight, j)
                    })
                    .filter(|&(_, j)| sure[j])
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                if best.is_none() {
                    best = (0..n)
                        .filter(|&j| sure[j])
                        .map(|j| (math::dist(&self.configs[i], &self.configs[j]), j))
                        .min_by(|a, b| a.0.total_cmp(&b.0));
                }
                out[i][k] = match best {
                    Some((_, j)) if self.output_values[j][k] < 0.0 => -1,
                    _ => 1,
                };
            }
        }
        out
    }

    pub fn set_threshold(&mut self, threshold: f64) -> Result<()> {
        if !(threshold >= 0.0) {
            return Err(Error::InvalidThreshold(threshold));
        }
        self.threshold = threshold;
        Ok(())
    }

    pub fn set_node_clearances(&mut self, nodes: &[NodeClearance]) {
        assert_eq!(nodes.len(), self.num_nodes());
        for (i, nc) in nodes.iter().enumerate() {
            self.node_clearance[i] = nc.distance;
            self.node_flagged[i] = nc.flagged;
        }
    }

    /// Decides every edge that the endpoint data settles at the current
    /// threshold and returns the indices that still need a segment solve.
    ///
    /// An edge is kept without solving when the 1-Lipschitz bound from its
    /// endpoint clearances reaches the threshold, and dropped without solving
    /// when a known critical point of either endpoint lies closer than the
    /// threshold to the segment.
    pub fn classify_edges(&mut self, nodes: &[NodeClearance]) -> Vec<usize> {
        let t = self.threshold;
        let mut pending = Vec::new();
        for (k, e) in self.edges.iter_mut().enumerate() {
            let (na, nb) = (&nodes[e.a as usize], &nodes[e.b as usize]);
            if na.flagged || nb.flagged {
                e.kind = ClearanceKind::Failed;
                e.clearance = f64::NAN;
                continue;
            }
            let (da, db) = (na.distance, nb.distance);
            let lower = lipschitz_lower_bound(da, db, e.weight).min(da.min(db));
            let (ca, cb) = (&self.configs[e.a as usize], &self.configs[e.b as usize]);
            let upper = witness_upper_bound(ca, cb, na.witnesses().chain(nb.witnesses())).min(da.min(db));
            e.lower = lower;
            e.upper = upper;
            if lower >= t {
                e.kind = ClearanceKind::LowerBound;
                e.clearance = lower;
            } else if upper < t {
                e.kind = ClearanceKind::UpperBound;
                e.clearance = upper;
            } else {
                e.kind = ClearanceKind::Unknown;
                pending.push(k);
            }
        }
        pending
    }

    pub fn set_edge_clearance(&mut self, k: usize, c: EdgeClearance) {
        let e = &mut self.edges[k];
        if c.flagged || c.distance.is_nan() {
            e.kind = ClearanceKind::Failed;
            e.clearance = f64::NAN;
            return;
        }
        e.kind = ClearanceKind::Exact;
        e.clearance = c.distance;
        e.lower = c.distance;
        e.upper = c.distance;
    }

    /// Node clearances, edge classification and the remaining segment
    /// solves, run sequentially.
    pub fn attach_clearances<B: ClearanceBackend + ?Sized>(&mut self, backend: &B) -> Vec<NodeClearance> {
        let nodes: Vec<NodeClearance> = self.configs.iter().map(|c| backend.node(c)).collect();
        self.set_node_clearances(&nodes);
        for k in self.classify_edges(&nodes) {
            let e = self.edges[k];
            let (a, b) = (e.a as usize, e.b as usize);
            let c = backend.edge(&self.configs[a], &self.configs[b], &nodes[a], &nodes[b]);
            self.set_edge_clearance(k, c);
        }
        nodes
    }

    /// Solves only the undecided edges that can still change the input or
    /// input/output partitions at the current threshold; the rest stay
    /// `Unknown` and are treated as pruned. Component counts match those of
    /// a full resolution.
    ///
    /// `solve` receives batches of edge indices and returns their clearances
    /// in the same order, so callers may evaluate a batch in parallel.
    /// Returns the number of edges solved.
    pub fn resolve_for_modes(
        &mut self,
        pending: &[usize],
        batch: usize,
        mut solve: impl FnMut(&ConfigGraph, &[usize]) -> Vec<EdgeClearance>,
    ) -> usize {
        let t = self.threshold;
        let n = self.num_nodes();
        let mut input = Dsu::new(n);
        let mut io = Dsu::new(n);
        for e in &self.edges {
            if e.clears(t) {
                input.union(e.a as usize, e.b as usize);
                if self.signs[e.a as usize] == self.signs[e.b as usize] {
                    io.union(e.a as usize, e.b as usize);
                }
            }
        }
        // likely keepers first, so that they merge components early
        let mut order = pending.to_vec();
        order.sort_by(|&x, &y| {
            let (ex, ey) = (&self.edges[x], &self.edges[y]);
            (ey.lower + ey.upper.min(ey.lower + ey.weight))
                .total_cmp(&(ex.lower + ex.upper.min(ex.lower + ex.weight)))
                .then(x.cmp(&y))
        });
        let mut solved = 0;
        let mut pos = 0;
        let batch = batch.max(1);
        while pos < order.len() {
            let mut chunk = Vec::with_capacity(batch);
            while pos < order.len() && chunk.len() < batch {
                let k = order[pos];
                pos += 1;
                let e = &self.edges[k];
                let (a, b) = (e.a as usize, e.b as usize);
                let same = self.signs[a] == self.signs[b];
                if input.find(a) != input.find(b) || (same && io.find(a) != io.find(b)) {
                    chunk.push(k);
                }
            }
            if chunk.is_empty() {
                continue;
            }
            let res = solve(self, &chunk);
            solved += chunk.len();
            for (&k, c) in chunk.iter().zip(res) {
                self.set_edge_clearance(k, c);
                let e = &self.edges[k];
                if e.clears(t) {
                    input.union(e.a as usize, e.b as usize);
                    if self.signs[e.a as usize] == self.signs[e.b as usize] {
                        io.union(e.a as usize, e.b as usize);
                    }
                }
            }
        }
        solved
    }

    /// Counts of edges per clearance kind, indexed by `ClearanceKind as usize`.
    pub fn kind_counts(&self) -> [usize; 5] {
        let mut c = [0usize; 5];
        for e in &self.edges {
            c[e.kind as usize] += 1;
        }
        c
    }

    /// Drops edges not certified to clear `threshold`, then isolated nodes.
    /// The result keeps `threshold` as its own.
    pub fn prune(&self, threshold: f64) -> Result<ConfigGraph> {
        if !(threshold >= 0.0) {
            return Err(Error::InvalidThreshold(threshold));
        }
        let mut keep_node = vec![false; self.num_nodes()];
        let kept: Vec<&Edge> = self.edges.iter().filter(|e| e.clears(threshold)).collect();
        for e in &kept {
            keep_node[e.a as usize] = true;
            keep_node[e.b as usize] = true;
        }
        if threshold == 0.0 && self.edges.iter().all(|e| e.kind != ClearanceKind::Failed) {
            // everything clears zero, including unattached edges
            let mut g = self.clone();
            g.threshold = 0.0;
            return Ok(g);
        }
        let mut remap = vec![u32::MAX; self.num_nodes()];
        let mut next = 0u32;
        for (i, &k) in keep_node.iter().enumerate() {
            if k {
                remap[i] = next;
                next += 1;
            }
        }
        let sel = |i: usize| keep_node[i];
        let mut g = ConfigGraph {
            design: self.design,
            epsilon: self.epsilon,
            wfs: self.wfs,
            radius: self.radius,
            threshold,
            configs: filter(&self.configs, sel),
            branches: filter(&self.branches, sel),
            output_values: filter(&self.output_values, sel),
            signs: filter(&self.signs, sel),
            node_clearance: filter(&self.node_clearance, sel),
            node_flagged: filter(&self.node_flagged, sel),
            edges: Vec::with_capacity(kept.len()),
        };
        for e in kept {
            let mut e = *e;
            e.a = remap[e.a as usize];
            e.b = remap[e.b as usize];
            g.edges.push(e);
        }
        Ok(g)
    }

    /// Edge filter for the given mode partition.
    pub fn edge_in(&self, e: &Edge, partition: Partition, threshold: f64) -> bool {
        let same_signs = self.signs[e.a as usize] == self.signs[e.b as usize];
        match partition {
            Partition::All => true,
            Partition::Input => e.clears(threshold),
            Partition::Output => same_signs,
            Partition::InputOutput => same_signs && e.clears(threshold),
        }
    }

    /// Connected components over the edges accepted by `partition`.
    pub fn components(&self, partition: Partition, threshold: f64) -> Components {
        let n = self.num_nodes();
        let mut dsu = Dsu::new(n);
        let mut touched = vec![false; n];
        for e in &self.edges {
            if self.edge_in(e, partition, threshold) {
                dsu.union(e.a as usize, e.b as usize);
                touched[e.a as usize] = true;
                touched[e.b as usize] = true;
            }
        }
        // after pruning, nodes without edges are gone
        let drop_isolated = matches!(partition, Partition::Input | Partition::InputOutput);
        let mut size = vec![0usize; n];
        for i in 0..n {
            if !drop_isolated || touched[i] {
                size[dsu.find(i)] += 1;
            }
        }
        let mut label = vec![u32::MAX; n];
        let mut root_label = vec![u32::MAX; n];
        let mut count = 0u32;
        let mut debris = 0usize;
        for i in 0..n {
            if drop_isolated && !touched[i] {
                continue;
            }
            let r = dsu.find(i);
            if size[r] < MIN_MODE_SIZE {
                continue;
            }
            if root_label[r] == u32::MAX {
                root_label[r] = count;
                count += 1;
            }
            label[i] = root_label[r];
        }
        for i in 0..n {
            if (!drop_isolated || touched[i]) && dsu.find(i) == i && size[i] < MIN_MODE_SIZE {
                debris += 1;
            }
        }
        Components {
            count: count as usize,
            debris,
            label,
        }
    }
}

fn filter<T: Copy>(v: &[T], sel: impl Fn(usize) -> bool) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| sel(*i))
        .map(|(_, x)| *x)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partition {
    /// Every edge.
    All,
    /// Edges clearing the threshold.
    Input,
    /// Edges whose endpoints share output sign labels.
    Output,
    /// Both conditions.
    InputOutput,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    /// Components with at least [`MIN_MODE_SIZE`] nodes.
    pub count: usize,
    /// Smaller components, not counted.
    pub debris: usize,
    /// Component id per node, `u32::MAX` for removed or debris nodes.
    pub label: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeReport {
    pub input_modes: usize,
    pub output_modes: usize,
    pub io_modes: usize,
    pub input: Components,
    pub output: Components,
    pub io: Components,
}

impl ModeReport {
    pub fn triple(&self) -> (usize, usize, usize) {
        (self.input_modes, self.output_modes, self.io_modes)
    }
}

/// Input, output and input/output mode partitions at `threshold`.
pub fn mode_report(g: &ConfigGraph, threshold: f64) -> Result<ModeReport> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let input = g.components(Partition::Input, threshold);
    let output = g.components(Partition::Output, threshold);
    let io = g.components(Partition::InputOutput, threshold);
    Ok(ModeReport {
        input_modes: input.count,
        output_modes: output.count,
        io_modes: io.count,
        input,
        output,
        io,
    })
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }
}
