//! Memoised, parallel clearance queries.

use std::collections::HashMap;
use std::sync::Mutex;

use fivebar_core::graph::{ClearanceBackend, ConfigGraph, EdgeClearance, NodeClearance};
use fivebar_core::homotopy::TrackerSettings;
use fivebar_core::singdist::{DistanceStarts, SingularityDistance};
use fivebar_core::CanonicalDesign;
use rayon::prelude::*;

use crate::cache::{edge_key, node_key, ClearanceCache, EdgeRecord, NodeRecord};

/// Node and edge clearances backed by [`SingularityDistance`].
///
/// Results are memoised by configuration bits. Concurrent writers of the
/// same key store identical values, so the last write simply wins.
pub struct ClearanceService {
    dist: SingularityDistance,
    pool: rayon::ThreadPool,
    nodes: Mutex<HashMap<String, NodeClearance>>,
    edges: Mutex<HashMap<String, EdgeClearance>>,
}

impl ClearanceService {
    pub fn new(d: &CanonicalDesign, starts: DistanceStarts, threads: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(ClearanceService {
            dist: SingularityDistance::new(d, starts, TrackerSettings::default()),
            pool,
            nodes: Mutex::new(HashMap::new()),
            edges: Mutex::new(HashMap::new()),
        })
    }

    pub fn starts(&self) -> &DistanceStarts {
        self.dist.starts()
    }

    pub fn distance(&self) -> &SingularityDistance {
        &self.dist
    }

    /// Seeds the memo tables from a cache file.
    pub fn import(&self, cache: &ClearanceCache) {
        let mut nodes = self.nodes.lock().unwrap();
        for (k, v) in &cache.nodes {
            nodes.insert(k.clone(), v.to_clearance());
        }
        let mut edges = self.edges.lock().unwrap();
        for (k, v) in &cache.edges {
            edges.insert(k.clone(), v.to_clearance());
        }
    }

    /// Writes every memoised result into `cache`.
    pub fn export(&self, cache: &mut ClearanceCache) {
        for (k, v) in self.nodes.lock().unwrap().iter() {
            cache.nodes.insert(k.clone(), NodeRecord::from(v));
        }
        for (k, v) in self.edges.lock().unwrap().iter() {
            cache.edges.insert(k.clone(), EdgeRecord::from(v));
        }
    }

    pub fn memo_sizes(&self) -> (usize, usize) {
        (self.nodes.lock().unwrap().len(), self.edges.lock().unwrap().len())
    }

    fn node_memo(&self, z: &[f64; 6]) -> NodeClearance {
        let key = node_key(z);
        if let Some(v) = self.nodes.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v = NodeClearance::from_result(self.dist.point(z));
        self.nodes.lock().unwrap().insert(key, v.clone());
        v
    }

    fn edge_memo(&self, z0: &[f64; 6], z1: &[f64; 6], n0: &NodeClearance, n1: &NodeClearance) -> EdgeClearance {
        let key = edge_key(z0, z1);
        if let Some(v) = self.edges.lock().unwrap().get(&key) {
            return *v;
        }
        let q = self
            .dist
            .segment_with(z0, z1, Some(n0.critical.clone()), Some(n1.critical.clone()));
        let v = EdgeClearance {
            distance: q.distance(),
            flagged: q.flagged(),
        };
        self.edges.lock().unwrap().insert(key, v);
        v
    }

    /// Node clearances in parallel, in input order.
    pub fn node_clearances(&self, configs: &[[f64; 6]]) -> Vec<NodeClearance> {
        self.pool
            .install(|| configs.par_iter().map(|z| self.node_memo(z)).collect())
    }

    /// Clearances of the listed edges in parallel, in input order.
    pub fn edge_clearances(&self, g: &ConfigGraph, nodes: &[NodeClearance], ks: &[usize]) -> Vec<EdgeClearance> {
        self.pool.install(|| {
            ks.par_iter()
                .map(|&k| {
                    let e = &g.edges[k];
                    let (a, b) = (e.a as usize, e.b as usize);
                    self.edge_memo(&g.configs[a], &g.configs[b], &nodes[a], &nodes[b])
                })
                .collect()
        })
    }
}

impl ClearanceBackend for ClearanceService {
    fn node(&self, z: &[f64; 6]) -> NodeClearance {
        self.node_memo(z)
    }

    fn edge(&self, z0: &[f64; 6], z1: &[f64; 6], n0: &NodeClearance, n1: &NodeClearance) -> EdgeClearance {
        self.edge_memo(z0, z1, n0, n1)
    }
}
