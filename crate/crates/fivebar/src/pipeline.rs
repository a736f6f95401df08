//! Pipeline stages shared by the command-line tool and the tests.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use fivebar_core::fivebar::canonicalize;
use fivebar_core::graph::{mode_report, ClearanceBackend, ClearanceKind, Partition};
use fivebar_core::homotopy::TrackerSettings;
use fivebar_core::planner::{find_ceiling_floor, find_perpendicular_ellipse_point, EllipsePair, Planner};
use fivebar_core::sampler::{epsilon_from_wfs, epsilon_sample, estimate_wfs, SampleSettings, WfsSettings};
use fivebar_core::singdist::ab_initio;
use fivebar_core::{CanonicalDesign, ConfigGraph, Configuration, ModeReport, PathResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cache::{ClearanceCache, StartsRecord};
use crate::config::ProjectConfig;
use crate::format::{GraphFile, Stage};
use crate::service::ClearanceService;

/// Edges solved per parallel batch, per worker.
const BATCH_PER_THREAD: usize = 32;

/// Human-readable key/value summary of a stage.
#[derive(Clone, Debug, Default)]
pub struct Summary {
    pub title: String,
    pub lines: Vec<(String, String)>,
}

impl Summary {
    fn new(title: &str) -> Self {
        Summary {
            title: title.into(),
            lines: Vec::new(),
        }
    }

    fn add(&mut self, key: &str, value: impl fmt::Display) {
        self.lines.push((key.into(), value.to_string()));
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.title)?;
        let width = self.lines.iter().map(|l| l.0.len()).max().unwrap_or(0);
        for (k, v) in &self.lines {
            writeln!(f, "  {k:<width$}  {v}")?;
        }
        Ok(())
    }
}

pub fn artifact_path(cfg: &ProjectConfig, stage: Stage) -> PathBuf {
    cfg.paths.graph.join(format!("{}.fbg", stage.name()))
}

pub fn canonical(cfg: &ProjectConfig) -> Result<CanonicalDesign> {
    Ok(canonicalize(&cfg.design())?)
}

/// ε from the config, or `0.99 · W / 2` from a feature-size estimate.
pub fn choose_epsilon(cfg: &ProjectConfig, d: &CanonicalDesign) -> Result<(f64, Option<f64>)> {
    match cfg.epsilon {
        Some(e) => Ok((e, None)),
        None => {
            let (w, _) = estimate_wfs(d, &WfsSettings::default())?;
            Ok((epsilon_from_wfs(w), Some(w)))
        }
    }
}

pub fn sample(cfg: &ProjectConfig) -> Result<(GraphFile, Summary)> {
    let t0 = Instant::now();
    let d = canonical(cfg)?;
    let (eps, wfs) = choose_epsilon(cfg, &d)?;
    let mut s = epsilon_sample(&d, eps, &SampleSettings::default())?;
    s.wfs = wfs;
    let g = ConfigGraph::nodes_only(&d, &s)?;
    let mut sum = Summary::new("sample");
    sum.add("W", wfs.map_or("given ε".into(), |w| w.to_string()));
    sum.add("epsilon", eps);
    sum.add("radius", g.radius);
    sum.add("nodes", g.num_nodes());
    sum.add("grid vertices", s.stats.grid_vertices);
    sum.add("unresolved cells", s.stats.flagged);
    sum.add("seconds", format!("{:.1}", t0.elapsed().as_secs_f64()));
    Ok((
        GraphFile {
            stage: Stage::Sample,
            seed: cfg.seed,
            cache: String::new(),
            graph: g,
        },
        sum,
    ))
}

pub fn graph(mut file: GraphFile) -> (GraphFile, Summary) {
    let t0 = Instant::now();
    file.graph.connect();
    file.stage = Stage::Graph;
    let g = &file.graph;
    let mut sum = Summary::new("graph");
    sum.add("nodes", g.num_nodes());
    sum.add("edges", g.num_edges());
    sum.add("radius", g.radius);
    sum.add("mean degree", format!("{:.1}", 2.0 * g.num_edges() as f64 / g.num_nodes().max(1) as f64));
    sum.add("seconds", format!("{:.1}", t0.elapsed().as_secs_f64()));
    (file, sum)
}

/// Opens the clearance cache (if it matches), running the ab initio solve
/// when it holds no start sets.
pub fn open_service(
    d: &CanonicalDesign,
    seed: u64,
    threads: usize,
    cache_path: Option<&Path>,
) -> Result<(ClearanceService, ClearanceCache)> {
    let mut cache = match cache_path {
        Some(p) => ClearanceCache::open(p, d, seed)?,
        None => ClearanceCache::new(d, seed),
    };
    let starts = match &cache.starts {
        Some(s) => s.to_starts()?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = ab_initio(d, &mut rng, &TrackerSettings::default())?;
            cache.starts = Some(StartsRecord::from(&s));
            s
        }
    };
    let svc = ClearanceService::new(d, starts, threads)?;
    svc.import(&cache);
    Ok((svc, cache))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// Every edge gets a certified decision at the threshold.
    Full,
    /// Only edges that can change the mode partitions are solved; the rest
    /// stay unknown and count as pruned.
    Modes,
}

pub fn weight(mut file: GraphFile, svc: &ClearanceService, threshold: Option<f64>, mode: WeightMode, threads: usize) -> Result<(GraphFile, Summary)> {
    let t0 = Instant::now();
    let g = &mut file.graph;
    let t = threshold.unwrap_or(g.radius);
    g.set_threshold(t)?;
    let nodes = svc.node_clearances(&g.configs);
    let t_nodes = t0.elapsed().as_secs_f64();
    g.set_node_clearances(&nodes);
    let pending = g.classify_edges(&nodes);
    let batch = BATCH_PER_THREAD * threads.max(1);
    let solved = match mode {
        WeightMode::Full => {
            for chunk in pending.chunks(batch) {
                let res = svc.edge_clearances(g, &nodes, chunk);
                for (&k, c) in chunk.iter().zip(res) {
                    g.set_edge_clearance(k, c);
                }
            }
            pending.len()
        }
        WeightMode::Modes => g.resolve_for_modes(&pending, batch, |g, ks| svc.edge_clearances(g, &nodes, ks)),
    };
    file.stage = Stage::Weighted;
    let g = &file.graph;
    let kinds = g.kind_counts();
    let mut sum = Summary::new("weight");
    sum.add("threshold", t);
    sum.add("mode", format!("{mode:?}").to_lowercase());
    sum.add("node solves", g.num_nodes());
    sum.add("flagged nodes", g.node_flagged.iter().filter(|&&f| f).count());
    sum.add("edges decided by bounds", kinds[ClearanceKind::LowerBound as usize] + kinds[ClearanceKind::UpperBound as usize]);
    sum.add("edges pending", pending.len());
    sum.add("edges solved", solved);
    sum.add("edges unknown", kinds[ClearanceKind::Unknown as usize]);
    sum.add("edges failed", kinds[ClearanceKind::Failed as usize]);
    sum.add("edges clearing T", g.edges.iter().filter(|e| e.clears(t)).count());
    sum.add("node seconds", format!("{t_nodes:.1}"));
    sum.add("seconds", format!("{:.1}", t0.elapsed().as_secs_f64()));
    Ok((file, sum))
}

pub fn prune(file: &GraphFile, threshold: f64) -> Result<(GraphFile, Summary)> {
    let g = file.graph.prune(threshold)?;
    let mut sum = Summary::new("prune");
    sum.add("threshold", threshold);
    sum.add("nodes", format!("{} -> {}", file.graph.num_nodes(), g.num_nodes()));
    sum.add("edges", format!("{} -> {}", file.graph.num_edges(), g.num_edges()));
    Ok((
        GraphFile {
            stage: Stage::Pruned,
            seed: file.seed,
            cache: file.cache.clone(),
            graph: g,
        },
        sum,
    ))
}

pub fn modes(g: &ConfigGraph, threshold: f64) -> Result<(ModeReport, Summary)> {
    let m = mode_report(g, threshold)?;
    let mut sum = Summary::new("modes");
    sum.add("threshold", threshold);
    let (i, o, io) = m.triple();
    sum.add("triple (input, output, io)", format!("({i}, {o}, {io})"));
    sum.add("debris (input, output, io)", format!("({}, {}, {})", m.input.debris, m.output.debris, m.io.debris));
    Ok((m, sum))
}

/// Path query that resolves unknown edge clearances on demand: search with
/// unknown edges allowed, solve the unknown edges on the result, repeat
/// until the path uses certified edges only.
pub fn plan(
    g: &mut ConfigGraph,
    svc: &ClearanceService,
    start: &Configuration,
    goal: &Configuration,
    avoid: bool,
) -> Result<PathResult> {
    let backend: &dyn ClearanceBackend = svc;
    let (s, t) = {
        let planner = Planner::new(g);
        (
            planner.attach(&start.to_array(), avoid, Some(backend))?,
            planner.attach(&goal.to_array(), avoid, Some(backend))?,
        )
    };
    loop {
        let (path, unknown) = {
            let planner = Planner::new(g).optimistic();
            let path = planner.plan_attached(&s, &t, avoid)?;
            let adj = g.adjacency();
            let mut unknown = Vec::new();
            if avoid {
                for w in path.nodes.windows(2) {
                    for &k in &adj[w[0] as usize] {
                        let e = &g.edges[k as usize];
                        if e.other(w[0]) == w[1] && e.kind == ClearanceKind::Unknown {
                            unknown.push(k as usize);
                        }
                    }
                }
            }
            (path, unknown)
        };
        if unknown.is_empty() {
            return Ok(path);
        }
        let nodes: Vec<_> = unknown
            .iter()
            .flat_map(|&k| [g.edges[k].a, g.edges[k].b])
            .collect();
        let mut node_data = vec![Default::default(); g.num_nodes()];
        for v in nodes {
            node_data[v as usize] = svc.node(&g.configs[v as usize]);
        }
        let res = svc.edge_clearances(g, &node_data, &unknown);
        for (&k, c) in unknown.iter().zip(res) {
            g.set_edge_clearance(k, c);
        }
    }
}

/// Perpendicular-ellipse candidates, best score first.
pub fn perpendicular_endpoints(g: &ConfigGraph) -> Vec<EllipsePair> {
    find_perpendicular_ellipse_point(g, &g.design)
}

/// Ceiling/floor node pairs in the same input mode.
pub fn ceiling_floor_endpoints(g: &ConfigGraph) -> Vec<(u32, u32, f64)> {
    let input = g.components(Partition::Input, g.threshold);
    find_ceiling_floor(g, |v| input.label[v as usize] != u32::MAX)
        .into_iter()
        .filter(|c| input.label[c.ceiling as usize] == input.label[c.floor as usize])
        .map(|c| (c.ceiling, c.floor, c.gap))
        .collect()
}

/// Statistics bundled by the report command. Every number is recomputable
/// from the weighted graph file and the path files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub nodes: usize,
    pub edges: usize,
    pub edges_clearing_threshold: usize,
    pub nodes_after_pruning: usize,
    pub edge_kinds: [usize; 5],
    pub wfs: Option<f64>,
    pub epsilon: f64,
    pub radius: f64,
    pub threshold: f64,
    pub modes: (usize, usize, usize),
    pub paths: Vec<PathStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathStats {
    pub file: String,
    pub avoid: bool,
    pub configurations: usize,
    pub length: f64,
    pub min_clearance: f64,
}

pub fn report(g: &ConfigGraph, paths: &[PathBuf]) -> Result<(Report, Summary)> {
    let t = g.threshold;
    let m = mode_report(g, t)?;
    let pruned = g.prune(t)?;
    let mut stats = Vec::new();
    for p in paths {
        let rec = crate::export::read_path(std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?)?;
        stats.push(PathStats {
            file: p.file_name().map_or(String::new(), |f| f.to_string_lossy().into_owned()),
            avoid: rec.avoid,
            configurations: rec.configs.len(),
            length: rec.length(),
            min_clearance: rec.min_clearance(),
        });
    }
    let r = Report {
        nodes: g.num_nodes(),
        edges: g.num_edges(),
        edges_clearing_threshold: pruned.num_edges(),
        nodes_after_pruning: pruned.num_nodes(),
        edge_kinds: g.kind_counts(),
        wfs: g.wfs,
        epsilon: g.epsilon,
        radius: g.radius,
        threshold: t,
        modes: m.triple(),
        paths: stats,
    };
    let mut sum = Summary::new("report");
    sum.add("W", r.wfs.map_or("given ε".into(), |w| w.to_string()));
    sum.add("epsilon", r.epsilon);
    sum.add("radius", r.radius);
    sum.add("threshold", r.threshold);
    sum.add("nodes", r.nodes);
    sum.add("edges (before pruning)", r.edges);
    sum.add("nodes after pruning", r.nodes_after_pruning);
    sum.add("edges after pruning", r.edges_clearing_threshold);
    sum.add("mode triple", format!("{:?}", r.modes));
    for p in &r.paths {
        sum.add(
            &format!("path {}", p.file),
            format!("avoid={} length={:.4} min_clearance={:.4}", p.avoid, p.length, p.min_clearance),
        );
    }
    Ok((r, sum))
}
