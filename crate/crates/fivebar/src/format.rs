//! Binary graph container and its plain-text export.
//!
//! All numbers are little-endian. Layout, in order:
//!
//! | field        | type          | notes                                         |
//! |--------------|---------------|-----------------------------------------------|
//! | magic        | `[u8; 8]`     | `FIVEBARG`                                    |
//! | version      | `u32`         | [`FORMAT_VERSION`]                            |
//! | stage        | `u8`          | 0 sample, 1 graph, 2 weighted, 3 pruned       |
//! | dim          | `u8`          | always 6                                      |
//! | reserved     | `u16`         | 0                                             |
//! | design       | `10 × f64`    | b, l1, l2, l3, l4, p, q, frame angle, tx, ty  |
//! | epsilon      | `f64`         |                                               |
//! | wfs          | `f64`         | NaN when ε was given explicitly               |
//! | radius       | `f64`         | r(ε)                                          |
//! | threshold    | `f64`         | T                                             |
//! | seed         | `u64`         |                                               |
//! | cache        | `u32` + bytes | UTF-8 path of the clearance cache relative to the graph directory, may be empty |
//! | node count   | `u64`         |                                               |
//! | edge count   | `u64`         |                                               |
//! | nodes        | 76 bytes each | z (6 × f64), h1, h2, D_c (f64), branch, s1, s2 (i8), flags (u8, bit 0: flagged) |
//! | edges        | 41 bytes each | a, b (u32), weight, D_e, lower, upper (f64), kind (u8) |
//!
//! Edge kinds: 0 unknown, 1 exact, 2 lower bound only, 3 upper bound only,
//! 4 failed. For kinds 2 and 3, `D_e` holds the bound.

use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use fivebar_core::fivebar::{CanonicalDesign, Frame};
use fivebar_core::graph::{ClearanceKind, Edge};
use fivebar_core::ConfigGraph;

pub const MAGIC: &[u8; 8] = b"FIVEBARG";
pub const FORMAT_VERSION: u32 = 1;
pub const NODE_BYTES: usize = 6 * 8 + 3 * 8 + 4;
pub const EDGE_BYTES: usize = 2 * 4 + 4 * 8 + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[repr(u8)]
pub enum Stage {
    Sample = 0,
    Graph = 1,
    Weighted = 2,
    Pruned = 3,
}

impl Stage {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => Stage::Sample,
            1 => Stage::Graph,
            2 => Stage::Weighted,
            3 => Stage::Pruned,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Sample => "sample",
            Stage::Graph => "graph",
            Stage::Weighted => "weighted",
            Stage::Pruned => "pruned",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a graph file (bad magic)")]
    BadMagic,
    #[error("graph file version {0} is not supported (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("corrupt graph file: {0}")]
    Corrupt(String),
    #[error("expected a {expected} file, found stage {found}")]
    WrongStage { expected: &'static str, found: &'static str },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub stage: Stage,
    pub seed: u64,
    /// Clearance cache the weights came from.
    pub cache: String,
    pub graph: ConfigGraph,
}

impl GraphFile {
    pub fn write_to<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = BufWriter::new(w);
        let g = &self.graph;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&[self.stage as u8, 6, 0, 0])?;
        let d = &g.design;
        for v in [d.b, d.l1, d.l2, d.l3, d.l4, d.p, d.q, d.frame.angle, d.frame.tx, d.frame.ty] {
            put_f64(&mut w, v)?;
        }
        put_f64(&mut w, g.epsilon)?;
        put_f64(&mut w, g.wfs.unwrap_or(f64::NAN))?;
        put_f64(&mut w, g.radius)?;
        put_f64(&mut w, g.threshold)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.cache.len() as u32).to_le_bytes())?;
        w.write_all(self.cache.as_bytes())?;
        w.write_all(&(g.num_nodes() as u64).to_le_bytes())?;
        w.write_all(&(g.num_edges() as u64).to_le_bytes())?;
        for i in 0..g.num_nodes() {
            for v in g.configs[i] {
                put_f64(&mut w, v)?;
            }
            put_f64(&mut w, g.output_values[i][0])?;
            put_f64(&mut w, g.output_values[i][1])?;
            put_f64(&mut w, g.node_clearance[i])?;
            w.write_all(&[
                g.branches[i] as u8,
                g.signs[i][0] as u8,
                g.signs[i][1] as u8,
                g.node_flagged[i] as u8,
            ])?;
        }
        for e in &g.edges {
            w.write_all(&e.a.to_le_bytes())?;
            w.write_all(&e.b.to_le_bytes())?;
            for v in [e.weight, e.clearance, e.lower, e.upper] {
                put_f64(&mut w, v)?;
            }
            w.write_all(&[e.kind as u8])?;
        }
        w.flush()
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, FormatError> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(FormatError::BadMagic);
        }
        let version = get_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(FormatError::Version(version));
        }
        let mut head = [0u8; 4];
        r.read_exact(&mut head)?;
        let stage = Stage::from_u8(head[0]).ok_or_else(|| FormatError::Corrupt(format!("stage {}", head[0])))?;
        if head[1] != 6 {
            return Err(FormatError::Corrupt(format!("dimension {}", head[1])));
        }
        let mut dv = [0.0; 10];
        for v in dv.iter_mut() {
            *v = get_f64(&mut r)?;
        }
        let design = CanonicalDesign {
            b: dv[0],
            l1: dv[1],
            l2: dv[2],
            l3: dv[3],
            l4: dv[4],
            p: dv[5],
            q: dv[6],
            frame: Frame {
                angle: dv[7],
                tx: dv[8],
                ty: dv[9],
            },
        };
        let epsilon = get_f64(&mut r)?;
        let wfs = get_f64(&mut r)?;
        let radius = get_f64(&mut r)?;
        let threshold = get_f64(&mut r)?;
        let seed = get_u64(&mut r)?;
        let len = get_u32(&mut r)? as usize;
        let mut cache = vec![0u8; len];
        r.read_exact(&mut cache)?;
        let cache = String::from_utf8(cache).map_err(|_| FormatError::Corrupt("cache path is not UTF-8".into()))?;
        let n = get_u64(&mut r)? as usize;
        let m = get_u64(&mut r)? as usize;
        let mut g = ConfigGraph {
            design,
            epsilon,
            wfs: (!wfs.is_nan()).then_some(wfs),
            radius,
            threshold,
            configs: Vec::with_capacity(n),
            branches: Vec::with_capacity(n),
            output_values: Vec::with_capacity(n),
            signs: Vec::with_capacity(n),
            node_clearance: Vec::with_capacity(n),
            node_flagged: Vec::with_capacity(n),
            edges: Vec::with_capacity(m),
        };
        let mut buf = [0u8; NODE_BYTES];
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().unwrap());
            g.configs.push([f(0), f(1), f(2), f(3), f(4), f(5)]);
            g.output_values.push([f(6), f(7)]);
            g.node_clearance.push(f(8));
            g.branches.push(buf[72] as i8);
            g.signs.push([buf[73] as i8, buf[74] as i8]);
            g.node_flagged.push(buf[75] & 1 != 0);
        }
        let mut buf = [0u8; EDGE_BYTES];
        for _ in 0..m {
            r.read_exact(&mut buf)?;
            let u = |k: usize| u32::from_le_bytes(buf[k..k + 4].try_into().unwrap());
            let f = |k: usize| f64::from_le_bytes(buf[8 + 8 * k..16 + 8 * k].try_into().unwrap());
            let kind = ClearanceKind::from_u8(buf[40]).ok_or_else(|| FormatError::Corrupt(format!("edge kind {}", buf[40])))?;
            let e = Edge {
                a: u(0),
                b: u(4),
                weight: f(0),
                clearance: f(1),
                lower: f(2),
                upper: f(3),
                kind,
            };
            if e.a as usize >= n || e.b as usize >= n {
                return Err(FormatError::Corrupt(format!("edge ({}, {}) out of range", e.a, e.b)));
            }
            g.edges.push(e);
        }
        if r.fill_buf()?.is_empty() {
            Ok(GraphFile { stage, seed, cache, graph: g })
        } else {
            Err(FormatError::Corrupt("trailing bytes".into()))
        }
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        self.write_to(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::read_from(std::fs::File::open(path)?)
    }

    /// Loads a file and checks that it is at least at stage `min`.
    pub fn load_stage(path: &Path, min: Stage) -> Result<Self, FormatError> {
        let f = Self::load(path)?;
        if f.stage < min {
            return Err(FormatError::WrongStage {
                expected: min.name(),
                found: f.stage.name(),
            });
        }
        Ok(f)
    }

    /// One line per node and per edge:
    ///
    /// ```text
    /// node <id> <x> <y> <cφ> <sφ> <cψ> <sψ> <h1> <h2> <D_c> <branch> <s1> <s2> <flagged>
    /// edge <a> <b> <weight> <D_e> <lower> <upper> <kind>
    /// ```
    ///
    /// Floats are written in shortest round-trip form.
    pub fn write_text<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = BufWriter::new(w);
        let g = &self.graph;
        let d = &g.design;
        writeln!(w, "# fivebar graph v{FORMAT_VERSION} stage {}", self.stage.name())?;
        writeln!(
            w,
            "# design b={} l1={} l2={} l3={} l4={} p={} q={} frame=({}, {}, {})",
            d.b, d.l1, d.l2, d.l3, d.l4, d.p, d.q, d.frame.angle, d.frame.tx, d.frame.ty
        )?;
        writeln!(
            w,
            "# epsilon={} wfs={} r={} T={} seed={} nodes={} edges={}",
            g.epsilon,
            g.wfs.unwrap_or(f64::NAN),
            g.radius,
            g.threshold,
            self.seed,
            g.num_nodes(),
            g.num_edges()
        )?;
        for i in 0..g.num_nodes() {
            let z = &g.configs[i];
            writeln!(
                w,
                "node {i} {} {} {} {} {} {} {} {} {} {} {} {} {}",
                z[0],
                z[1],
                z[2],
                z[3],
                z[4],
                z[5],
                g.output_values[i][0],
                g.output_values[i][1],
                g.node_clearance[i],
                g.branches[i],
                g.signs[i][0],
                g.signs[i][1],
                g.node_flagged[i] as u8
            )?;
        }
        for e in &g.edges {
            writeln!(
                w,
                "edge {} {} {} {} {} {} {}",
                e.a, e.b, e.weight, e.clearance, e.lower, e.upper, e.kind as u8
            )?;
        }
        w.flush()
    }
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
