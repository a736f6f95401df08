//! Shortest-path queries on the clearance graph and the searches behind the
//! case studies.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::curve::{trace_real_curve, QuadricCurve, TraceSettings};
use crate::error::{Error, Result};
use crate::fivebar::{inverse_kinematics, output_sing_values, velocity_ellipse, CanonicalDesign, Configuration, VelocityEllipse};
use crate::graph::{ClearanceBackend, ClearanceKind, ConfigGraph, Dsu, Edge, NodeClearance, Partition};
use crate::homotopy::TrackerSettings;
use crate::math;
use crate::systems::{build_f, build_input_singular_curve, build_output_singular_curve, project_to_zero_set};

/// Number of nodes a far query is linked to.
pub const ATTACH_NEIGHBOURS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    /// Graph nodes visited, in order.
    pub nodes: Vec<u32>,
    /// Configurations along the path, including off-graph endpoints.
    pub configs: Vec<[f64; 6]>,
    pub total_length: f64,
    /// Certified lower bound on the smallest edge clearance; links of
    /// non-avoiding queries carry no bound and are skipped.
    pub min_clearance: f64,
    /// Per-edge clearance lower bounds, one per consecutive config pair.
    pub edge_clearances: Vec<f64>,
    /// Output sign vectors met along the path, consecutive repeats removed.
    pub modes: Vec<[i8; 2]>,
}

impl PathResult {
    /// Number of individual sign flips of `h1` and `h2` along the path.
    pub fn sign_changes(&self) -> usize {
        self.modes
            .windows(2)
            .map(|w| (w[0][0] != w[1][0]) as usize + (w[0][1] != w[1][1]) as usize)
            .sum()
    }
}

/// A query configuration linked into the graph by temporary edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Attachment {
    pub config: [f64; 6],
    /// `(node, length, clearance lower bound)`.
    pub links: Vec<(u32, f64, f64)>,
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Read-only view of a graph with adjacency lists, for repeated queries.
pub struct Planner<'g> {
    pub graph: &'g ConfigGraph,
    adj: Vec<Vec<u32>>,
    optimistic: bool,
}

impl<'g> Planner<'g> {
    pub fn new(graph: &'g ConfigGraph) -> Self {
        Planner {
            adj: graph.adjacency(),
            graph,
            optimistic: false,
        }
    }

    /// Also treats edges whose clearance is still `Unknown` as usable when
    /// avoiding. Paths found this way must be checked edge by edge.
    pub fn optimistic(mut self) -> Self {
        self.optimistic = true;
        self
    }

    fn usable(&self, e: &Edge, avoid: bool) -> bool {
        !avoid || e.clears(self.graph.threshold) || (self.optimistic && e.kind == ClearanceKind::Unknown)
    }

    /// Component id of every node over usable edges.
    pub fn component_ids(&self, avoid: bool) -> Vec<usize> {
        let n = self.graph.num_nodes();
        let mut dsu = Dsu::new(n);
        for e in &self.graph.edges {
            if self.usable(e, avoid) {
                dsu.union(e.a as usize, e.b as usize);
            }
        }
        let mut id = vec![usize::MAX; n];
        let mut root_id = vec![usize::MAX; n];
        let mut next = 0;
        for i in 0..n {
            let r = dsu.find(i);
            if root_id[r] == usize::MAX {
                root_id[r] = next;
                next += 1;
            }
            id[i] = root_id[r];
        }
        id
    }

    /// Single-source shortest path lengths over usable edges.
    pub fn dijkstra(&self, source: u32, avoid: bool) -> Vec<f64> {
        let n = self.graph.num_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source as usize] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(du, u)) = heap.pop() {
            if du > dist[u as usize] {
                continue;
            }
            for &k in &self.adj[u as usize] {
                let e = &self.graph.edges[k as usize];
                if !self.usable(e, avoid) {
                    continue;
                }
                let v = e.other(u);
                let nd = du + e.weight;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        dist
    }

    /// A* between graph nodes with the ambient distance as heuristic.
    pub fn shortest_path(&self, source: u32, target: u32, avoid: bool) -> Option<(Vec<u32>, f64)> {
        let s = Attachment {
            config: self.graph.configs[source as usize],
            links: vec![(source, 0.0, f64::INFINITY)],
        };
        let t = Attachment {
            config: self.graph.configs[target as usize],
            links: vec![(target, 0.0, f64::INFINITY)],
        };
        self.astar(&s, &t, avoid).map(|(p, len)| {
            let mut nodes = Vec::with_capacity(p.len());
            for v in p {
                if nodes.last() != Some(&v) {
                    nodes.push(v);
                }
            }
            (nodes, len)
        })
    }

    /// A* from `start` to `goal` through their links. Returns graph nodes
    /// on the path and its length, including both link edges.
    fn astar(&self, start: &Attachment, goal: &Attachment, avoid: bool) -> Option<(Vec<u32>, f64)> {
        let n = self.graph.num_nodes();
        let virt_start = n as u32;
        let virt_goal = n as u32 + 1;
        let mut goal_link = vec![f64::INFINITY; n];
        for &(v, w, _) in &goal.links {
            goal_link[v as usize] = goal_link[v as usize].min(w);
        }
        let h = |v: u32| -> f64 {
            if v >= virt_start {
                0.0
            } else {
                math::dist(&self.graph.configs[v as usize], &goal.config)
            }
        };
        let mut g_cost = vec![f64::INFINITY; n + 2];
        let mut parent = vec![u32::MAX; n + 2];
        let mut closed = vec![false; n + 2];
        let mut heap = BinaryHeap::new();
        g_cost[virt_start as usize] = 0.0;
        heap.push(Item(h(virt_start), virt_start));
        while let Some(Item(_, u)) = heap.pop() {
            if closed[u as usize] {
                continue;
            }
            closed[u as usize] = true;
            if u == virt_goal {
                let mut path = Vec::new();
                let mut v = parent[u as usize];
                while v != virt_start {
                    path.push(v);
                    v = parent[v as usize];
                }
                path.reverse();
                return Some((path, g_cost[u as usize]));
            }
            let gu = g_cost[u as usize];
            let mut relax = |v: u32, w: f64, heap: &mut BinaryHeap<Item>| {
                let nd = gu + w;
                if nd < g_cost[v as usize] {
                    g_cost[v as usize] = nd;
                    parent[v as usize] = u;
                    heap.push(Item(nd + h(v), v));
                }
            };
            if u == virt_start {
                for &(v, w, _) in &start.links {
                    relax(v, w, &mut heap);
                }
                continue;
            }
            if goal_link[u as usize].is_finite() {
                relax(virt_goal, goal_link[u as usize], &mut heap);
            }
            for &k in &self.adj[u as usize] {
                let e = &self.graph.edges[k as usize];
                if self.usable(e, avoid) {
                    relax(e.other(u), e.weight, &mut heap);
                }
            }
        }
        None
    }

    /// Links `z` into the graph. Nodes within `r` are tried nearest first;
    /// when none is that close, `z` is projected onto the configuration
    /// space and linked to its nearest nodes. With `avoid`, a link is kept
    /// only if its segment clears the threshold.
    pub fn attach(
        &self,
        z: &[f64; 6],
        avoid: bool,
        backend: Option<&dyn ClearanceBackend>,
    ) -> Result<Attachment> {
        let g = self.graph;
        let mut order: Vec<(f64, u32)> = g
            .configs
            .iter()
            .enumerate()
            .map(|(i, c)| (math::dist(c, z), i as u32))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some(&(d0, i0)) = order.first() {
            if d0 <= 1e-12 {
                return Ok(Attachment {
                    config: *z,
                    links: vec![(i0, 0.0, g.node_clearance[i0 as usize])],
                });
            }
        }
        let mut config = *z;
        if order.first().map_or(true, |o| o.0 > g.radius) {
            let f = build_f(&g.design).compile();
            let p = project_to_zero_set(&f, z, 1e-12, 50).ok_or(Error::DetachedQuery)?;
            config.copy_from_slice(&p);
            for o in order.iter_mut() {
                o.0 = math::dist(&g.configs[o.1 as usize], &config);
            }
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        } else {
            order.retain(|o| o.0 <= g.radius);
        }
        order.truncate(ATTACH_NEIGHBOURS);
        let mut links = Vec::new();
        let mut own: Option<NodeClearance> = None;
        for (w, i) in order {
            if !avoid {
                links.push((i, w, f64::NAN));
                continue;
            }
            let Some(b) = backend else {
                return Err(Error::DetachedQuery);
            };
            let nc = own.get_or_insert_with(|| b.node(&config));
            if nc.flagged || nc.distance < g.threshold {
                return Err(Error::DetachedQuery);
            }
            let node = &g.configs[i as usize];
            let ni = b.node(node);
            let c = b.edge(&config, node, nc, &ni);
            if !c.flagged && c.distance >= g.threshold {
                links.push((i, w, c.distance));
            }
        }
        if links.is_empty() {
            return Err(Error::DetachedQuery);
        }
        Ok(Attachment { config, links })
    }

    /// Shortest path between two attached queries.
    pub fn plan_attached(&self, start: &Attachment, goal: &Attachment, avoid: bool) -> Result<PathResult> {
        let g = self.graph;
        let Some((nodes, len)) = self.astar(start, goal, avoid) else {
            let ids = self.component_ids(avoid);
            return Err(Error::NoPath {
                start_component: ids[start.links[0].0 as usize],
                goal_component: ids[goal.links[0].0 as usize],
            });
        };
        let mut configs = Vec::with_capacity(nodes.len() + 2);
        let mut clear = Vec::new();
        let first = nodes[0];
        let last = *nodes.last().unwrap();
        let link_clear = |a: &Attachment, v: u32| {
            a.links
                .iter()
                .filter(|l| l.0 == v)
                .map(|l| l.2)
                .fold(f64::NAN, f64::max)
        };
        if math::dist(&start.config, &g.configs[first as usize]) > 0.0 {
            configs.push(start.config);
            clear.push(link_clear(start, first));
        }
        for (k, &v) in nodes.iter().enumerate() {
            configs.push(g.configs[v as usize]);
            if k + 1 < nodes.len() {
                let w = nodes[k + 1];
                let e = self.adj[v as usize]
                    .iter()
                    .map(|&e| &g.edges[e as usize])
                    .filter(|e| e.other(v) == w && self.usable(e, avoid))
                    .min_by(|a, b| a.weight.total_cmp(&b.weight))
                    .expect("path edge");
                clear.push(e.lower);
            }
        }
        if math::dist(&goal.config, &g.configs[last as usize]) > 0.0 {
            configs.push(goal.config);
            clear.push(link_clear(goal, last));
        }
        let mut modes: Vec<[i8; 2]> = Vec::new();
        let mut labels = Vec::with_capacity(configs.len());
        if configs.len() > nodes.len() && configs[0] != g.configs[first as usize] {
            labels.push(raw_signs(g, &configs[0]));
        }
        labels.extend(nodes.iter().map(|&v| g.signs[v as usize]));
        if labels.len() < configs.len() {
            labels.push(raw_signs(g, configs.last().unwrap()));
        }
        for s in labels {
            if modes.last() != Some(&s) {
                modes.push(s);
            }
        }
        Ok(PathResult {
            nodes,
            configs,
            total_length: len,
            min_clearance: clear.iter().copied().fold(f64::INFINITY, f64::min),
            edge_clearances: clear,
            modes,
        })
    }

    /// Attach both queries, then search.
    pub fn plan(
        &self,
        start: &Configuration,
        goal: &Configuration,
        avoid: bool,
        backend: Option<&dyn ClearanceBackend>,
    ) -> Result<PathResult> {
        let s = self.attach(&start.to_array(), avoid, backend)?;
        let t = self.attach(&goal.to_array(), avoid, backend)?;
        self.plan_attached(&s, &t, avoid)
    }
}

fn raw_signs(g: &ConfigGraph, z: &[f64; 6]) -> [i8; 2] {
    let (h1, h2) = output_sing_values(&g.design, &Configuration::from_array(*z));
    [sign(h1), sign(h2)]
}

fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Two inverse-kinematics solutions at one workspace point and how far their
/// velocity ellipses are from perpendicular with a 4:1 aspect ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsePair {
    pub x: f64,
    pub y: f64,
    pub configs: [Configuration; 2],
    pub ellipses: [VelocityEllipse; 2],
    /// `|angle between major axes − 90°|`, degrees.
    pub angle_error: f64,
    /// Largest relative deviation of an aspect ratio from the target.
    pub aspect_error: f64,
}

impl EllipsePair {
    /// Errors scaled by 5° and 10%.
    pub fn score(&self) -> f64 {
        self.angle_error / 5.0 + self.aspect_error / 0.1
    }
}

/// Target aspect ratio of the perpendicular-ellipse search.
pub const TARGET_ASPECT: f64 = 4.0;

fn best_pair_at(d: &CanonicalDesign, x: f64, y: f64, pattern: Option<[[i8; 2]; 2]>) -> Option<EllipsePair> {
    let sols = inverse_kinematics(d, x, y);
    let info: Vec<(Configuration, VelocityEllipse, [i8; 2])> = sols
        .into_iter()
        .filter_map(|c| {
            let e = velocity_ellipse(d, &c).ok()?;
            let (h1, h2) = output_sing_values(d, &c);
            Some((c, e, [sign(h1), sign(h2)]))
        })
        .collect();
    let mut best: Option<EllipsePair> = None;
    for i in 0..info.len() {
        for j in i + 1..info.len() {
            if let Some(p) = pattern {
                if [info[i].2, info[j].2] != p {
                    continue;
                }
            }
            let (e1, e2) = (info[i].1, info[j].1);
            let mut diff = (e1.major_axis_angle - e2.major_axis_angle) % PI;
            if diff < 0.0 {
                diff += PI;
            }
            let angle_error = math::abs(diff - FRAC_PI_2).to_degrees();
            let aspect_error = f64::max(
                math::abs(e1.aspect_ratio() / TARGET_ASPECT - 1.0),
                math::abs(e2.aspect_ratio() / TARGET_ASPECT - 1.0),
            );
            if !angle_error.is_finite() || !aspect_error.is_finite() {
                continue;
            }
            let cand = EllipsePair {
                x,
                y,
                configs: [info[i].0, info[j].0],
                ellipses: [e1, e2],
                angle_error,
                aspect_error,
            };
            if best.as_ref().map_or(true, |b| cand.score() < b.score()) {
                best = Some(cand);
            }
        }
    }
    best
}

fn pattern_of(d: &CanonicalDesign, p: &EllipsePair) -> [[i8; 2]; 2] {
    p.configs.map(|c| {
        let (h1, h2) = output_sing_values(d, &c);
        [sign(h1), sign(h2)]
    })
}

/// Scans the workspace points of the graph nodes for the IK pair closest
/// to perpendicular 4:1 ellipses, then polishes the best few by a pattern
/// search in `(x, y)` that keeps the pair's output signs. Candidates are
/// returned best first, at most one per distinct sign pattern and location.
pub fn find_perpendicular_ellipse_point(g: &ConfigGraph, d: &CanonicalDesign) -> Vec<EllipsePair> {
    let mut scanned: Vec<EllipsePair> = g
        .configs
        .iter()
        .filter_map(|c| best_pair_at(d, c[0], c[1], None))
        .collect();
    scanned.sort_by(|a, b| a.score().total_cmp(&b.score()));
    let mut out: Vec<EllipsePair> = Vec::new();
    for cand in scanned.into_iter().take(64) {
        let pat = pattern_of(d, &cand);
        let mut best = cand;
        let mut step = 0.5 * g.epsilon;
        while step > 1e-9 {
            let mut moved = false;
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                if let Some(p) = best_pair_at(d, best.x + dx * step, best.y + dy * step, Some(pat)) {
                    if p.score() < best.score() {
                        best = p;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        let dup = out.iter().any(|o| {
            pattern_of(d, o) == pat && math::hypot(o.x - best.x, o.y - best.y) < 2.0 * g.epsilon
        });
        if !dup {
            out.push(best);
        }
    }
    out.sort_by(|a, b| a.score().total_cmp(&b.score()));
    out
}

/// A node on a local upper bound of `y` within its output mode paired with
/// a node of another output mode on a nearby local lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CeilingFloor {
    pub ceiling: u32,
    pub floor: u32,
    /// Vertical gap `y_floor − y_ceiling` between the two end-effector points.
    pub gap: f64,
}

/// Ceiling/floor candidates, closest pairs first. Nodes are binned into
/// `x` columns of width `ε` per output mode; the top node of a column lies
/// on a ceiling of that mode and the bottom node on a floor. A pair is a
/// ceiling of one mode and a floor of another in the same or an adjacent
/// column, with the floor no more than `ε` below the ceiling. Only nodes
/// accepted by `keep` are considered.
pub fn find_ceiling_floor(g: &ConfigGraph, keep: impl Fn(u32) -> bool) -> Vec<CeilingFloor> {
    let modes = g.components(Partition::Output, g.threshold);
    let w = g.epsilon;
    let col = |i: usize| math::floor(g.configs[i][0] / w) as i64;
    let mut columns: Vec<((u32, i64), Vec<u32>)> = Vec::new();
    {
        let mut keyed: Vec<((u32, i64), u32)> = (0..g.num_nodes())
            .filter(|&i| modes.label[i] != u32::MAX)
            .map(|i| ((modes.label[i], col(i)), i as u32))
            .collect();
        keyed.sort_unstable();
        for (k, i) in keyed {
            match columns.last_mut() {
                Some((lk, v)) if *lk == k => v.push(i),
                _ => columns.push((k, vec![i])),
            }
        }
    }
    let y = |i: u32| g.configs[i as usize][1];
    let mut ceilings = Vec::new();
    let mut floors = Vec::new();
    for ((m, c), ids) in &columns {
        if ids.len() < 3 {
            continue;
        }
        let top = *ids.iter().max_by(|&&a, &&b| y(a).total_cmp(&y(b)).then(b.cmp(&a))).unwrap();
        let bot = *ids.iter().min_by(|&&a, &&b| y(a).total_cmp(&y(b)).then(a.cmp(&b))).unwrap();
        if y(top) - y(bot) <= w {
            continue;
        }
        if keep(top) {
            ceilings.push((*m, *c, top));
        }
        if keep(bot) {
            floors.push((*m, *c, bot));
        }
    }
    let mut out = Vec::new();
    for &(mc, cc, top) in &ceilings {
        for &(mf, cf, bot) in &floors {
            if mc == mf || (cc - cf).abs() > 1 {
                continue;
            }
            let gap = y(bot) - y(top);
            if gap < -w {
                continue;
            }
            out.push(CeilingFloor { ceiling: top, floor: bot, gap });
        }
    }
    out.sort_by(|a, b| {
        math::abs(a.gap)
            .total_cmp(&math::abs(b.gap))
            .then(a.ceiling.cmp(&b.ceiling))
            .then(a.floor.cmp(&b.floor))
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// Projections of both output-singular loci.
    WorkspaceBoundary,
    /// The input-singular curve, split by output sign vector.
    InputSingProjection,
    /// Each output-singular locus, split by the sign of the other function.
    OutputSingProjection,
}

/// A polyline in the canonical `(x, y)` plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarCurve {
    /// Output sign vector of the piece; `0` where the curve itself has `h = 0`.
    pub signs: [i8; 2],
    /// 1 or 2 for output-singular loci, 0 for the input-singular curve.
    pub locus: u8,
    pub points: Vec<[f64; 2]>,
    /// Configurations the points were projected from.
    pub configs: Vec<[f64; 6]>,
    pub closed: bool,
}

/// Traces the requested loci on the configuration space and projects them
/// to the workspace plane.
pub fn extract_curves<R: Rng + ?Sized>(
    d: &CanonicalDesign,
    kind: CurveKind,
    ts: &TraceSettings,
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<PlanarCurve> {
    let bound = d.l1 + d.rho();
    let mut out = Vec::new();
    let loci: Vec<(u8, QuadricCurve)> = match kind {
        CurveKind::InputSingProjection => vec![(0, QuadricCurve::new(build_input_singular_curve(d)))],
        _ => vec![
            (1, QuadricCurve::new(build_output_singular_curve(d, 0))),
            (2, QuadricCurve::new(build_output_singular_curve(d, 1))),
        ],
    };
    for (locus, curve) in loci {
        for line in trace_real_curve(&curve, bound, ts, rng, st) {
            let label = |z: &[f64; 6]| -> [i8; 2] {
                let (h1, h2) = output_sing_values(d, &Configuration::from_array(*z));
                match (kind, locus) {
                    (CurveKind::WorkspaceBoundary, _) => [0, 0],
                    (_, 1) => [0, sign(h2)],
                    (_, 2) => [sign(h1), 0],
                    _ => [sign(h1), sign(h2)],
                }
            };
            let mut pieces: Vec<PlanarCurve> = Vec::new();
            for z in &line.points {
                let s = label(z);
                match pieces.last_mut() {
                    Some(p) if p.signs == s => {
                        p.points.push([z[0], z[1]]);
                        p.configs.push(*z);
                    }
                    _ => pieces.push(PlanarCurve {
                        signs: s,
                        locus,
                        points: vec![[z[0], z[1]]],
                        configs: vec![*z],
                        closed: false,
                    }),
                }
            }
            if pieces.len() == 1 {
                pieces[0].closed = line.closed;
            } else if line.closed && pieces.len() > 1 && pieces[0].signs == pieces.last().unwrap().signs {
                // the seam of a closed curve is not a real split
                let last = pieces.pop().unwrap();
                let first = &mut pieces[0];
                let mut pts = last.points;
                pts.extend_from_slice(&first.points);
                let mut cfg = last.configs;
                cfg.extend_from_slice(&first.configs);
                first.points = pts;
                first.configs = cfg;
            }
            out.extend(pieces);
        }
    }
    out
}
