//! Epsilon-samples of the configuration manifold and weak-feature-size
//! estimation through 2-bottlenecks.
//!
//! Sampling walks an adaptive quadtree over the input torus `(φ, ψ)`, solves
//! forward kinematics at the grid vertices and thins the resulting point
//! cloud greedily.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::fivebar::{forward_kinematics_cs, CanonicalDesign, Configuration};
use crate::math;
use crate::poly::{PolySystem, Polynomial};
use crate::spatial::HashGrid;
use crate::systems::build_f;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSettings {
    /// Cells per torus side at depth 0.
    pub base_cells: usize,
    pub max_depth: u32,
    /// A cell is split while same-branch points at adjacent corners are
    /// farther apart than `refine_factor · ε`.
    pub refine_factor: f64,
    /// Retained points are at least `spacing_factor · ε` apart.
    pub spacing_factor: f64,
    /// Shift of the grid origin in units of one base cell, in `[0, 1)`.
    pub offset: (f64, f64),
}

impl Default for SampleSettings {
    fn default() -> Self {
        SampleSettings {
            base_cells: 32,
            max_depth: 12,
            refine_factor: 0.5,
            spacing_factor: 0.5,
            offset: (0.0, 0.0),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleStats {
    pub grid_vertices: usize,
    pub leaf_cells: usize,
    pub max_depth_reached: u32,
    /// FK solutions before thinning.
    pub candidates: usize,
    pub retained: usize,
    /// Retained points next to cells that hit the depth cap unresolved.
    pub flagged: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSample {
    pub points: Vec<Configuration>,
    /// FK branch of each point (`±1`, `0` at a tangency).
    pub branches: Vec<i8>,
    pub flagged: Vec<bool>,
    pub epsilon: f64,
    /// Feature-size estimate `ε` was derived from, if any.
    pub wfs: Option<f64>,
    pub stats: SampleStats,
}

impl EpsilonSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arrays(&self) -> Vec<[f64; 6]> {
        self.points.iter().map(|c| c.to_array()).collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct VertexSols {
    n: u8,
    pts: [[f64; 6]; 2],
    branch: [i8; 2],
}

impl VertexSols {
    fn find(&self, b: i8) -> Option<&[f64; 6]> {
        (0..self.n as usize)
            .find(|&i| self.branch[i] == b)
            .map(|i| &self.pts[i])
    }
}

struct Grid<'a> {
    d: &'a CanonicalDesign,
    fine: u64,
    origin: (f64, f64),
    verts: HashMap<u64, VertexSols>,
}

impl Grid<'_> {
    fn vertex(&mut self, i: u64, j: u64) -> VertexSols {
        let (i, j) = (i % self.fine, j % self.fine);
        let key = i * self.fine + j;
        if let Some(v) = self.verts.get(&key) {
            return *v;
        }
        let phi = self.origin.0 + TAU * i as f64 / self.fine as f64;
        let psi = self.origin.1 + TAU * j as f64 / self.fine as f64;
        let sols = forward_kinematics_cs(
            self.d,
            math::cos(phi),
            math::sin(phi),
            math::cos(psi),
            math::sin(psi),
        );
        let mut v = VertexSols {
            n: 0,
            pts: [[0.0; 6]; 2],
            branch: [0; 2],
        };
        for s in sols.iter().take(2) {
            v.pts[v.n as usize] = s.config.to_array();
            v.branch[v.n as usize] = s.branch;
            v.n += 1;
        }
        self.verts.insert(key, v);
        v
    }
}

fn needs_split(corners: &[VertexSols; 4], tau: f64) -> bool {
    let n0 = corners[0].n;
    if corners.iter().any(|c| c.n != n0) {
        return true;
    }
    if corners.iter().any(|c| (0..c.n as usize).any(|k| c.branch[k] == 0)) {
        return true;
    }
    // corners in cyclic order
    for k in 0..4 {
        let a = &corners[k];
        let b = &corners[(k + 1) % 4];
        for br in [1i8, -1] {
            if let (Some(p), Some(q)) = (a.find(br), b.find(br)) {
                if math::dist(p, q) > tau {
                    return true;
                }
            }
        }
    }
    false
}

/// Adaptive torus grid followed by greedy thinning.
pub fn epsilon_sample(
    d: &CanonicalDesign,
    epsilon: f64,
    settings: &SampleSettings,
) -> Result<EpsilonSample> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let base = settings.base_cells as u64;
    let fine = base << settings.max_depth;
    let cell0 = TAU / base as f64;
    let mut grid = Grid {
        d,
        fine,
        origin: (-PI + settings.offset.0 * cell0, -PI + settings.offset.1 * cell0),
        verts: HashMap::new(),
    };
    let tau = settings.refine_factor * epsilon;
    let mut stats = SampleStats::default();
    let mut capped: Vec<(u64, u64, u64)> = Vec::new();
    // (i0, j0, size in fine units, depth)
    let mut stack: Vec<(u64, u64, u64, u32)> = Vec::new();
    let s0 = 1u64 << settings.max_depth;
    for i in (0..base).rev() {
        for j in (0..base).rev() {
            stack.push((i * s0, j * s0, s0, 0));
        }
    }
    while let Some((i0, j0, s, depth)) = stack.pop() {
        let corners = [
            grid.vertex(i0, j0),
            grid.vertex(i0 + s, j0),
            grid.vertex(i0 + s, j0 + s),
            grid.vertex(i0, j0 + s),
        ];
        stats.max_depth_reached = stats.max_depth_reached.max(depth);
        if needs_split(&corners, tau) {
            if depth < settings.max_depth {
                let h = s / 2;
                stack.push((i0 + h, j0 + h, h, depth + 1));
                stack.push((i0, j0 + h, h, depth + 1));
                stack.push((i0 + h, j0, h, depth + 1));
                stack.push((i0, j0, h, depth + 1));
                continue;
            }
            if corners.iter().all(|c| c.n > 0) {
                capped.push((i0, j0, s));
            }
        }
        stats.leaf_cells += 1;
    }
    stats.grid_vertices = grid.verts.len();
    let flagged_keys: hashbrown::HashSet<u64> = capped
        .iter()
        .flat_map(|&(i, j, s)| {
            [(i, j), (i + s, j), (i + s, j + s), (i, j + s)]
                .into_iter()
                .map(move |(a, b)| (a % fine) * fine + (b % fine))
        })
        .collect();

    let mut keys: Vec<u64> = grid.verts.keys().copied().collect();
    keys.sort_unstable();
    let spacing = settings.spacing_factor * epsilon;
    let mut thin = HashGrid::<3>::new(spacing);
    let mut kept: Vec<[f64; 6]> = Vec::new();
    let mut branches = Vec::new();
    let mut flagged = Vec::new();
    for key in keys {
        let v = grid.verts[&key];
        for k in 0..v.n as usize {
            stats.candidates += 1;
            let p = v.pts[k];
            if thin.any_within(&p, spacing, |id| &kept[id as usize]) {
                continue;
            }
            thin.insert(&p, kept.len() as u32);
            kept.push(p);
            branches.push(v.branch[k]);
            flagged.push(flagged_keys.contains(&key));
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySample);
    }
    stats.retained = kept.len();
    stats.flagged = flagged.iter().filter(|&&f| f).count();
    Ok(EpsilonSample {
        points: kept.into_iter().map(Configuration::from_array).collect(),
        branches,
        flagged,
        epsilon,
        wfs: None,
        stats,
    })
}

/// A 2-bottleneck: two points of the manifold whose difference is normal to
/// the manifold at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Bottleneck {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    /// `‖w1 − w2‖ / 2`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WfsSettings {
    /// Number of seed pairs passed to Newton.
    pub budget: usize,
    /// Spacing parameter of the pilot sample (`None`: derived from the design).
    pub pilot_epsilon: Option<f64>,
    /// Pairs whose graph distance exceeds this multiple of their ambient
    /// distance are treated as non-neighbours.
    pub geodesic_ratio: f64,
    pub sample: SampleSettings,
}

impl Default for WfsSettings {
    fn default() -> Self {
        WfsSettings {
            budget: 40,
            pilot_epsilon: None,
            geodesic_ratio: 1.5,
            sample: SampleSettings::default(),
        }
    }
}

/// Pilot resolution used when none is given. The angle coordinates pin the
/// ambient scale, so an absolute value works across designs.
pub const DEFAULT_PILOT_EPSILON: f64 = 0.14;

/// `ε = 0.99 · W / 2`.
pub fn epsilon_from_wfs(w: f64) -> f64 {
    0.99 * w / 2.0
}

/// Estimates the weak feature size of a design's configuration manifold.
pub fn estimate_wfs(d: &CanonicalDesign, settings: &WfsSettings) -> Result<(f64, Vec<Bottleneck>)> {
    let eps = settings
        .pilot_epsilon
        .unwrap_or(DEFAULT_PILOT_EPSILON);
    let pilot = epsilon_sample(d, eps, &settings.sample)?;
    let points: Vec<Vec<f64>> = pilot.points.iter().map(|c| c.to_array().to_vec()).collect();
    let f = build_f(d);
    estimate_wfs_from_pilot(&f, &points, 5.0 * settings.sample.spacing_factor * eps, settings)
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable bounded Dijkstra state.
struct Dijkstra {
    dist: Vec<f64>,
    touched: Vec<u32>,
    heap: BinaryHeap<HeapItem>,
}

impl Dijkstra {
    fn new(n: usize) -> Self {
        Dijkstra {
            dist: vec![f64::INFINITY; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Distances from `src` up to `cutoff`; farther nodes stay at `+∞`.
    fn run(&mut self, adj: &[Vec<(u32, f64)>], src: u32, cutoff: f64) {
        for &t in &self.touched {
            self.dist[t as usize] = f64::INFINITY;
        }
        self.touched.clear();
        self.heap.clear();
        self.dist[src as usize] = 0.0;
        self.touched.push(src);
        self.heap.push(HeapItem(0.0, src));
        while let Some(HeapItem(du, u)) = self.heap.pop() {
            if du > self.dist[u as usize] {
                continue;
            }
            for &(v, w) in &adj[u as usize] {
                let nd = du + w;
                if nd <= cutoff && nd < self.dist[v as usize] {
                    if self.dist[v as usize] == f64::INFINITY {
                        self.touched.push(v);
                    }
                    self.dist[v as usize] = nd;
                    self.heap.push(HeapItem(nd, v));
                }
            }
        }
    }
}

/// Closest point pairs that are far apart along the `radius` graph of the
/// pilot sample (or in different components).
pub fn non_neighbor_pairs(
    points: &[Vec<f64>],
    radius: f64,
    ratio: f64,
    wanted: usize,
) -> Vec<(u32, u32, f64)> {
    let n = points.len();
    let get = |id: u32| points[id as usize].as_slice();
    let mut grid = HashGrid::<3>::new(radius);
    for (i, p) in points.iter().enumerate() {
        grid.insert(p, i as u32);
    }
    let adj: Vec<Vec<(u32, f64)>> = (0..n)
        .map(|i| {
            grid.within(&points[i], radius, get)
                .into_iter()
                .filter(|&j| j as usize != i)
                .map(|j| (j, math::dist(&points[i], &points[j as usize])))
                .collect()
        })
        .collect();
    let diameter = {
        let mut lo = vec![f64::INFINITY; points[0].len()];
        let mut hi = vec![f64::NEG_INFINITY; points[0].len()];
        for p in points {
            for k in 0..p.len() {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        math::dist(&lo, &hi)
    };
    let mut reach = 1.25 * radius;
    let mut dij = Dijkstra::new(n);
    loop {
        let mut big = HashGrid::<3>::new(reach);
        for (i, p) in points.iter().enumerate() {
            big.insert(p, i as u32);
        }
        let mut pairs = Vec::new();
        for i in 0..n as u32 {
            let cands: Vec<(u32, f64)> = big
                .within(&points[i as usize], reach, get)
                .into_iter()
                .filter(|&j| j > i)
                .map(|j| (j, math::dist(&points[i as usize], &points[j as usize])))
                .filter(|&(_, dd)| dd > radius)
                .collect();
            if cands.is_empty() {
                continue;
            }
            let far = cands.iter().map(|c| c.1).fold(0.0, f64::max);
            dij.run(&adj, i, ratio * far);
            for (j, dd) in cands {
                let geo = dij.dist[j as usize];
                if geo > ratio * dd {
                    pairs.push((i, j, dd));
                }
            }
        }
        if pairs.len() >= wanted || reach >= diameter {
            pairs.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
            return pairs;
        }
        reach *= 2.0;
    }
}

/// Builds the square 2-bottleneck system in `(w1, w2, μ1, μ2)`.
pub fn bottleneck_system(f: &PolySystem) -> PolySystem {
    let n = f.num_vars();
    let m = f.len();
    let nv = 2 * n + 2 * m;
    let map1: Vec<usize> = (0..n).collect();
    let map2: Vec<usize> = (n..2 * n).collect();
    let embed = |p: &Polynomial, map: &[usize]| {
        Polynomial::from_terms(
            nv,
            p.terms().map(|(e, c)| {
                let mut e2 = vec![0u32; nv];
                for (i, &k) in e.iter().enumerate() {
                    e2[map[i]] += k;
                }
                (e2, *c)
            }),
        )
    };
    let f1: Vec<Polynomial> = f.polys.iter().map(|p| embed(p, &map1)).collect();
    let f2: Vec<Polynomial> = f.polys.iter().map(|p| embed(p, &map2)).collect();
    let mut polys = Vec::with_capacity(nv);
    polys.extend(f1.iter().cloned());
    polys.extend(f2.iter().cloned());
    for (fs, mu0, wmap) in [(&f1, 2 * n, &map1), (&f2, 2 * n + m, &map2)] {
        for k in 0..n {
            let mut e = &Polynomial::var(nv, k) - &Polynomial::var(nv, n + k);
            for (i, p) in fs.iter().enumerate() {
                e = &e - &(&Polynomial::var(nv, mu0 + i) * &p.derivative(wmap[k]));
            }
            polys.push(e);
        }
    }
    PolySystem::with_generic_names(nv, polys)
}

/// Newton solve of the bottleneck system from a seed pair, with validation.
pub fn refine_bottleneck(
    f: &PolySystem,
    system: &crate::poly::CompiledSystem,
    w1: &[f64],
    w2: &[f64],
) -> Option<Bottleneck> {
    let n = f.num_vars();
    let m = f.len();
    let nv = 2 * n + 2 * m;
    let fc = f.compile();
    let mut x = vec![0.0; nv];
    x[..n].copy_from_slice(w1);
    x[n..2 * n].copy_from_slice(w2);
    for (end, mu0) in [(0usize, 2 * n), (1, 2 * n + m)] {
        let p = if end == 0 { w1 } else { w2 };
        let mut val = vec![0.0; m];
        let mut jac = vec![0.0; m * n];
        fc.eval(p, &mut val, Some(&mut jac));
        let d: Vec<f64> = (0..n).map(|k| w1[k] - w2[k]).collect();
        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        for i in 0..m {
            for l in 0..m {
                a[i * m + l] = math::dot(&jac[i * n..(i + 1) * n], &jac[l * n..(l + 1) * n]);
            }
            b[i] = math::dot(&jac[i * n..(i + 1) * n], &d);
        }
        let mu = math::solve(a, b)?;
        x[mu0..mu0 + m].copy_from_slice(&mu);
    }
    if !levenberg_marquardt(system, &mut x, 200) {
        return None;
    }
    let (a, b) = (&x[..n], &x[n..2 * n]);
    let gap = math::dist(a, b);
    if gap <= 1e-6 * (1.0 + math::norm_inf(a)) {
        return None;
    }
    // orthogonality of the chord at both ends
    for p in [a, b] {
        if tangential_fraction(&fc, p, a, b, n, m)? > 1e-6 {
            return None;
        }
    }
    Some(Bottleneck {
        w1: a.to_vec(),
        w2: b.to_vec(),
        value: 0.5 * gap,
    })
}

/// Damped Gauss-Newton on `f(x) = 0`; copes with non-isolated solutions.
fn levenberg_marquardt(sys: &crate::poly::CompiledSystem, x: &mut [f64], max_iter: usize) -> bool {
    let n = x.len();
    let m = sys.npolys();
    let mut val = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    let mut trial = vec![0.0; m];
    let mut mu = 1e-6;
    sys.eval(x, &mut val, Some(&mut jac));
    let mut cost = math::dot(&val, &val);
    for _ in 0..max_iter {
        if math::norm_inf(&val) <= 1e-13 {
            return true;
        }
        let mut jtj = vec![0.0; n * n];
        let mut g = vec![0.0; n];
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            for a in 0..n {
                g[a] -= row[a] * val[i];
                if row[a] != 0.0 {
                    for b in 0..n {
                        jtj[a * n + b] += row[a] * row[b];
                    }
                }
            }
        }
        let diag = (0..n).map(|a| jtj[a * n + a]).fold(0.0, f64::max).max(1e-300);
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[k * n + k] += mu * diag;
            }
            let Some(dx) = math::solve(a, g.clone()) else {
                mu *= 10.0;
                if mu > 1e12 {
                    return false;
                }
                continue;
            };
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            sys.eval(&cand, &mut trial, None);
            let c = math::dot(&trial, &trial);
            if c < cost {
                x.copy_from_slice(&cand);
                sys.eval(x, &mut val, Some(&mut jac));
                cost = c;
                mu = f64::max(mu * 0.1, 1e-15);
                if math::norm_inf(&dx) <= 1e-15 * (1.0 + math::norm_inf(x)) {
                    return math::norm_inf(&val) <= 1e-10;
                }
                break;
            }
            mu *= 10.0;
            if mu > 1e12 {
                return math::norm_inf(&val) <= 1e-10;
            }
        }
    }
    math::norm_inf(&val) <= 1e-10
}

/// `‖P_T (a − b)‖ / ‖a − b‖` with `P_T` the tangent projector at `p`.
fn tangential_fraction(
    fc: &crate::poly::CompiledSystem,
    p: &[f64],
    a: &[f64],
    b: &[f64],
    n: usize,
    m: usize,
) -> Option<f64> {
    let mut val = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    fc.eval(p, &mut val, Some(&mut jac));
    let d: Vec<f64> = (0..n).map(|k| a[k] - b[k]).collect();
    let mut g = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for l in 0..m {
            g[i * m + l] = math::dot(&jac[i * n..(i + 1) * n], &jac[l * n..(l + 1) * n]);
        }
        rhs[i] = math::dot(&jac[i * n..(i + 1) * n], &d);
    }
    let mu = math::solve(g, rhs)?;
    let mut t = d.clone();
    for i in 0..m {
        for k in 0..n {
            t[k] -= mu[i] * jac[i * n + k];
        }
    }
    Some(math::norm2(&t) / math::norm2(&d))
}

/// Weak-feature-size estimate for an arbitrary smooth variety given a pilot
/// sample of it and the neighbourhood radius of that sample.
pub fn estimate_wfs_from_pilot(
    f: &PolySystem,
    pilot: &[Vec<f64>],
    radius: f64,
    settings: &WfsSettings,
) -> Result<(f64, Vec<Bottleneck>)> {
    if pilot.is_empty() {
        return Err(Error::EmptySample);
    }
    let pairs = non_neighbor_pairs(pilot, radius, settings.geodesic_ratio, 40 * settings.budget);
    // spread seeds: skip pairs whose ends both sit next to an already chosen pair
    let mut chosen: Vec<(u32, u32)> = Vec::new();
    for &(i, j, _) in &pairs {
        if chosen.len() >= settings.budget {
            break;
        }
        let near = |a: u32, b: u32| math::dist(&pilot[a as usize], &pilot[b as usize]) < 2.0 * radius;
        let dup = chosen
            .iter()
            .any(|&(a, b)| (near(a, i) && near(b, j)) || (near(a, j) && near(b, i)));
        if !dup {
            chosen.push((i, j));
        }
    }
    let sys = bottleneck_system(f);
    let compiled = sys.compile();
    let mut found: Vec<Bottleneck> = Vec::new();
    for (i, j) in chosen {
        if let Some(b) = refine_bottleneck(f, &compiled, &pilot[i as usize], &pilot[j as usize]) {
            let dup = found.iter().any(|o| {
                (math::dist(&o.w1, &b.w1) < 1e-6 && math::dist(&o.w2, &b.w2) < 1e-6)
                    || (math::dist(&o.w1, &b.w2) < 1e-6 && math::dist(&o.w2, &b.w1) < 1e-6)
            });
            if !dup {
                found.push(b);
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoBottleneck);
    }
    found.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok((found[0].value, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fivebar::{canonicalize, FiveBarDesign};

    fn circle_system(cx: f64) -> PolySystem {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let xs = &x - &Polynomial::constant(2, cx);
        let f = &(&(&xs * &xs) + &(&y * &y)) - &Polynomial::constant(2, 1.0);
        PolySystem::with_generic_names(2, vec![f])
    }

    fn circle_points(cx: f64, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|k| {
                let a = TAU * (k as f64 + 0.3) / n as f64;
                vec![cx + math::cos(a), math::sin(a)]
            })
            .collect()
    }

    #[test]
    fn unit_circle_wfs_is_one() {
        let pts = circle_points(0.0, 200);
        let (w, bn) = estimate_wfs_from_pilot(&circle_system(0.0), &pts, 0.1, &WfsSettings::default()).unwrap();
        assert!((w - 1.0).abs() < 1e-6, "{w}");
        let b = &bn[0];
        assert!((b.w1[0] + b.w2[0]).abs() < 1e-6 && (b.w1[1] + b.w2[1]).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_positive_epsilon() {
        let d = canonicalize(&FiveBarDesign::CASE_1).unwrap();
        assert!(matches!(
            epsilon_sample(&d, 0.0, &SampleSettings::default()),
            Err(Error::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn sample_spacing_and_residuals() {
        let d = canonicalize(&FiveBarDesign::CASE_1).unwrap();
        let eps = 0.08;
        let s = epsilon_sample(&d, eps, &SampleSettings::default()).unwrap();
        assert!(s.len() > 50);
        let pts = s.arrays();
        let f = build_f(&d);
        for p in &pts {
            let r = f.evaluate(p).unwrap();
            assert!(math::norm_inf(&r) < 1e-9);
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                assert!(math::dist(&pts[i], &pts[j]) >= eps / 4.0);
            }
        }
    }
}
