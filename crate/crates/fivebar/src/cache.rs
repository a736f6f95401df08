//! JSON cache of ab initio start sets and clearance results.
//!
//! Nodes are keyed by the bit patterns of their six coordinates, edges by
//! the ordered pair of node keys, so a cache stays valid across graph files
//! built from the same sample. Maps are sorted, which keeps the file
//! byte-identical across runs with the same inputs.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fivebar_core::graph::{EdgeClearance, NodeClearance};
use fivebar_core::homotopy::StartSet;
use fivebar_core::math::C64;
use fivebar_core::singdist::{CriticalPoint, DistanceStarts, SubResult, SubproblemStart};
use fivebar_core::systems::FjKind;
use fivebar_core::CanonicalDesign;
use serde::{Deserialize, Serialize};

pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClearanceCache {
    pub version: u32,
    /// Canonical design the entries belong to.
    pub design: Vec<f64>,
    pub seed: u64,
    pub starts: Option<StartsRecord>,
    pub nodes: BTreeMap<String, NodeRecord>,
    pub edges: BTreeMap<String, EdgeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartsRecord {
    pub first: SubproblemRecord,
    pub last: SubproblemRecord,
    pub interior: SubproblemRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubproblemRecord {
    pub kind: String,
    pub chart: Vec<[f64; 2]>,
    pub params: Vec<[f64; 2]>,
    pub gamma: [f64; 2],
    pub solutions: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub paths: usize,
    pub failed: usize,
    pub points: Vec<PointRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub w: [f64; 6],
    pub t: f64,
    pub distance: f64,
    pub lambda: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    /// `None` for `+∞`.
    pub distance: Option<f64>,
    pub flagged: bool,
}

pub fn design_key(d: &CanonicalDesign) -> Vec<f64> {
    vec![d.b, d.l1, d.l2, d.l3, d.l4, d.p, d.q, d.frame.angle, d.frame.tx, d.frame.ty]
}

pub fn node_key(z: &[f64; 6]) -> String {
    z.iter().map(|v| format!("{:016x}", v.to_bits())).collect()
}

pub fn edge_key(a: &[f64; 6], b: &[f64; 6]) -> String {
    let (ka, kb) = (node_key(a), node_key(b));
    if ka <= kb {
        format!("{ka}:{kb}")
    } else {
        format!("{kb}:{ka}")
    }
}

fn c(v: C64) -> [f64; 2] {
    [v.re, v.im]
}

fn uc(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

impl From<&SubproblemStart> for SubproblemRecord {
    fn from(s: &SubproblemStart) -> Self {
        SubproblemRecord {
            kind: match s.kind {
                FjKind::Node => "node",
                FjKind::Interior => "interior",
                FjKind::Full => "full",
            }
            .into(),
            chart: s.chart.iter().copied().map(c).collect(),
            params: s.start.params.iter().copied().map(c).collect(),
            gamma: c(s.start.gamma),
            solutions: s
                .start
                .solutions
                .iter()
                .map(|x| x.iter().copied().map(c).collect())
                .collect(),
        }
    }
}

impl SubproblemRecord {
    fn to_start(&self) -> Result<SubproblemStart> {
        let kind = match self.kind.as_str() {
            "node" => FjKind::Node,
            "interior" => FjKind::Interior,
            "full" => FjKind::Full,
            k => bail!("unknown sub-problem kind {k:?}"),
        };
        Ok(SubproblemStart {
            kind,
            chart: self.chart.iter().copied().map(uc).collect(),
            start: StartSet {
                params: self.params.iter().copied().map(uc).collect(),
                solutions: self
                    .solutions
                    .iter()
                    .map(|x| x.iter().copied().map(uc).collect())
                    .collect(),
                gamma: uc(self.gamma),
            },
        })
    }
}

impl From<&DistanceStarts> for StartsRecord {
    fn from(s: &DistanceStarts) -> Self {
        StartsRecord {
            first: (&s.first).into(),
            last: (&s.last).into(),
            interior: (&s.interior).into(),
        }
    }
}

impl StartsRecord {
    pub fn to_starts(&self) -> Result<DistanceStarts> {
        Ok(DistanceStarts {
            first: self.first.to_start()?,
            last: self.last.to_start()?,
            interior: self.interior.to_start()?,
        })
    }
}

impl From<&NodeClearance> for NodeRecord {
    fn from(n: &NodeClearance) -> Self {
        NodeRecord {
            paths: n.critical.paths,
            failed: n.critical.failed,
            points: n
                .critical
                .points
                .iter()
                .map(|p| PointRecord {
                    w: p.w,
                    t: p.t,
                    distance: p.distance,
                    lambda: p.lambda.clone(),
                })
                .collect(),
        }
    }
}

impl NodeRecord {
    pub fn to_clearance(&self) -> NodeClearance {
        NodeClearance::from_result(SubResult {
            points: self
                .points
                .iter()
                .map(|p| CriticalPoint {
                    w: p.w,
                    t: p.t,
                    distance: p.distance,
                    lambda: p.lambda.clone(),
                })
                .collect(),
            paths: self.paths,
            failed: self.failed,
        })
    }
}

impl From<&EdgeClearance> for EdgeRecord {
    fn from(e: &EdgeClearance) -> Self {
        EdgeRecord {
            distance: e.distance.is_finite().then_some(e.distance),
            flagged: e.flagged,
        }
    }
}

impl EdgeRecord {
    pub fn to_clearance(&self) -> EdgeClearance {
        EdgeClearance {
            distance: self.distance.unwrap_or(f64::INFINITY),
            flagged: self.flagged,
        }
    }
}

impl ClearanceCache {
    pub fn new(d: &CanonicalDesign, seed: u64) -> Self {
        ClearanceCache {
            version: CACHE_VERSION,
            design: design_key(d),
            seed,
            ..Default::default()
        }
    }

    /// Whether the cache was produced for this design and seed.
    pub fn matches(&self, d: &CanonicalDesign, seed: u64) -> bool {
        self.version == CACHE_VERSION && self.seed == seed && self.design == design_key(d)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let c: ClearanceCache = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if c.version != CACHE_VERSION {
            bail!("cache version {} is not supported (expected {CACHE_VERSION})", c.version);
        }
        Ok(c)
    }

    /// Loads `path` if it holds a matching cache, otherwise starts empty.
    pub fn open(path: &Path, d: &CanonicalDesign, seed: u64) -> Result<Self> {
        if path.exists() {
            let c = Self::load(path)?;
            if c.matches(d, seed) {
                return Ok(c);
            }
        }
        Ok(Self::new(d, seed))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
