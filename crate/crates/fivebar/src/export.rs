//! Path and curve exports as delimited text.

use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};

use fivebar_core::planner::PlanarCurve;
use fivebar_core::{CanonicalDesign, ConfigGraph, PathResult};

/// A path as written by [`write_path`], read back from text.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub avoid: bool,
    pub threshold: f64,
    pub nodes: Vec<Option<u32>>,
    pub configs: Vec<[f64; 6]>,
    /// Clearance of the edge leaving each row; the last row has none.
    pub clearances: Vec<f64>,
}

impl PathRecord {
    /// Sum of segment lengths, in path order.
    pub fn length(&self) -> f64 {
        self.configs
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    pub fn min_clearance(&self) -> f64 {
        self.clearances.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn fmt_sign(s: [i8; 2]) -> String {
    let c = |v: i8| if v < 0 { '-' } else { '+' };
    format!("({},{})", c(s[0]), c(s[1]))
}

/// Structured path file: header comments, then one row per configuration
/// `index node x y cφ sφ cψ sψ clearance` with `node = -1` for endpoints
/// off the graph and `clearance` for the edge to the next row (`-` on the
/// last row). Coordinates are in the canonical frame.
pub fn write_path<W: Write>(w: W, p: &PathResult, g: &ConfigGraph, avoid: bool) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# fivebar path")?;
    writeln!(w, "# avoid {avoid}")?;
    writeln!(w, "# threshold {}", g.threshold)?;
    writeln!(w, "# length {}", p.total_length)?;
    writeln!(w, "# min_clearance {}", p.min_clearance)?;
    writeln!(w, "# sign_changes {}", p.sign_changes())?;
    let modes: Vec<String> = p.modes.iter().map(|&s| fmt_sign(s)).collect();
    writeln!(w, "# modes {}", modes.join(" "))?;
    writeln!(w, "# index node x y c_phi s_phi c_psi s_psi clearance")?;
    let lead = p
        .nodes
        .first()
        .is_some_and(|&v| p.configs[0] != g.configs[v as usize]);
    let mut ids: Vec<i64> = Vec::with_capacity(p.configs.len());
    if lead {
        ids.push(-1);
    }
    ids.extend(p.nodes.iter().map(|&v| v as i64));
    ids.resize(p.configs.len(), -1);
    for (i, z) in p.configs.iter().enumerate() {
        let c = p
            .edge_clearances
            .get(i)
            .map_or("-".to_string(), |c| c.to_string());
        writeln!(w, "{i} {} {} {} {} {} {} {} {c}", ids[i], z[0], z[1], z[2], z[3], z[4], z[5])?;
    }
    w.flush()
}

pub fn read_path<R: Read>(r: R) -> io::Result<PathRecord> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut rec = PathRecord {
        avoid: false,
        threshold: f64::NAN,
        nodes: Vec::new(),
        configs: Vec::new(),
        clearances: Vec::new(),
    };
    for line in BufReader::new(r).lines() {
        let line = line?;
        if let Some(h) = line.strip_prefix("# ") {
            if let Some(v) = h.strip_prefix("avoid ") {
                rec.avoid = v.trim() == "true";
            } else if let Some(v) = h.strip_prefix("threshold ") {
                rec.threshold = v.trim().parse().map_err(|_| bad("threshold"))?;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 9 {
            return Err(bad("path row must have 9 fields"));
        }
        let node: i64 = f[1].parse().map_err(|_| bad("node id"))?;
        rec.nodes.push((node >= 0).then_some(node as u32));
        let mut z = [0.0; 6];
        for k in 0..6 {
            z[k] = f[2 + k].parse().map_err(|_| bad("coordinate"))?;
        }
        rec.configs.push(z);
        if f[8] != "-" {
            rec.clearances.push(f[8].parse().map_err(|_| bad("clearance"))?);
        }
    }
    Ok(rec)
}

/// `x	y` rows of the end-effector trace in the design's original frame.
pub fn write_path_xy<W: Write>(w: W, p: &PathResult, d: &CanonicalDesign) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "x\ty")?;
    for z in &p.configs {
        let (x, y) = d.frame.to_original(z[0], z[1]);
        writeln!(w, "{x}\t{y}")?;
    }
    w.flush()
}

/// `curve	locus	s1	s2	x	y` rows in the original frame; one curve id per
/// polyline. Closed polylines repeat their first point at the end.
pub fn write_curves<W: Write>(w: W, curves: &[PlanarCurve], d: &CanonicalDesign) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "curve\tlocus\ts1\ts2\tx\ty")?;
    for (id, c) in curves.iter().enumerate() {
        let pts = c.points.iter().chain(c.closed.then(|| &c.points[0]));
        for p in pts {
            let (x, y) = d.frame.to_original(p[0], p[1]);
            writeln!(w, "{id}\t{}\t{}\t{}\t{x}\t{y}", c.locus, c.signs[0], c.signs[1])?;
        }
    }
    w.flush()
}
