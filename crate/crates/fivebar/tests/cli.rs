//! End-to-end runs of the command-line tool on a coarse Case 1 sample.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 3
parallelism = 1
epsilon = 0.3

[design]
A = [0.259, 0.586]
B = [0.060, 0.590]
l1 = 0.465
l2 = 0.349
l3 = 0.249
l4 = 0.411
p = 0.049
q = 0.328
"#;

fn project(extra: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fivebar.toml");
    std::fs::write(&cfg, format!("{extra}\n{CONFIG}")).unwrap();
    (dir, cfg)
}

fn fivebar(cfg: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fivebar"))
        .arg("--config")
        .arg(cfg)
        .args(args)
        .output()
        .unwrap()
}

fn ok(cfg: &Path, args: &[&str]) -> String {
    let out = fivebar(cfg, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Minimal reader for the documented byte layout, independent of the
/// library's reader.
struct RawGraph {
    epsilon: f64,
    radius: f64,
    threshold: f64,
    nodes: usize,
    edges: Vec<(u32, u32, f64, u8)>,
}

fn read_raw(path: &Path) -> RawGraph {
    let mut b = Vec::new();
    std::fs::File::open(path).unwrap().read_to_end(&mut b).unwrap();
    assert_eq!(&b[..8], b"FIVEBARG");
    let f = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
    let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().unwrap());
    let mut o = 16 + 80;
    let epsilon = f(o);
    let radius = f(o + 16);
    let threshold = f(o + 24);
    o += 32 + 8;
    let clen = u32_at(o) as usize;
    o += 4 + clen;
    let n = u64_at(o) as usize;
    let m = u64_at(o + 8) as usize;
    o += 16 + n * 76;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        edges.push((u32_at(o), u32_at(o + 4), f(o + 16), b[o + 40]));
        o += 41;
    }
    assert_eq!(o, b.len());
    RawGraph {
        epsilon,
        radius,
        threshold,
        nodes: n,
        edges,
    }
}

#[test]
fn pipeline_end_to_end() {
    let (dir, cfg) = project("threshold = 0.5");
    let root = dir.path();

    // every stage needs the one before it
    let early = fivebar(&cfg, &["graph"]);
    assert_eq!(early.status.code(), Some(3));
    assert_eq!(fivebar(&cfg, &["modes"]).status.code(), Some(3));

    ok(&cfg, &["sample"]);
    let graph_out = ok(&cfg, &["graph"]);
    assert!(graph_out.contains("edges"));
    let weight_out = ok(&cfg, &["weight", "--modes-only"]);
    assert!(weight_out.contains("edges solved"));
    let modes = ok(&cfg, &["modes"]);
    let triple: Vec<usize> = modes
        .lines()
        .last()
        .unwrap()
        .split(' ')
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(triple.len(), 3);
    assert!(triple.iter().all(|&c| c >= 1));

    ok(&cfg, &["prune", "--threshold", "0"]);
    let graph = read_raw(&root.join("graph/graph.fbg"));
    let pruned = read_raw(&root.join("graph/pruned.fbg"));
    assert_eq!(pruned.edges.len(), graph.edges.len());
    assert_eq!(pruned.nodes, graph.nodes);

    ok(&cfg, &["plan", "--auto", "perpendicular", "--name", "case1"]);
    let avoid = std::fs::read_to_string(root.join("out/case1.avoid.path")).unwrap();
    let free = std::fs::read_to_string(root.join("out/case1.free.path")).unwrap();
    let header = |text: &str, key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("# {key} ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(header(&avoid, "length") >= header(&free, "length") - 1e-12);
    assert!(header(&avoid, "min_clearance") >= header(&avoid, "threshold"));
    let xy = std::fs::read_to_string(root.join("out/case1.avoid.tsv")).unwrap();
    assert_eq!(xy.lines().count(), avoid.lines().filter(|l| !l.starts_with('#')).count() + 1);

    ok(&cfg, &["curves", "--kind", "boundary"]);
    let boundary = std::fs::read_to_string(root.join("out/boundary.tsv")).unwrap();
    assert!(boundary.lines().count() > 1000);

    ok(&cfg, &["report"]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("out/report.json")).unwrap()).unwrap();

    // recompute the report's totals from the weighted graph file
    let w = read_raw(&root.join("graph/weighted.fbg"));
    let t = w.threshold;
    assert_eq!(report["nodes"], w.nodes);
    assert_eq!(report["edges"], w.edges.len());
    let clearing: Vec<&(u32, u32, f64, u8)> = w
        .edges
        .iter()
        .filter(|e| e.2 >= t && (1..=3).contains(&e.3))
        .collect();
    assert_eq!(report["edges_clearing_threshold"], clearing.len());
    let mut touched = vec![false; w.nodes];
    for e in &clearing {
        touched[e.0 as usize] = true;
        touched[e.1 as usize] = true;
    }
    assert_eq!(report["nodes_after_pruning"], touched.iter().filter(|&&b| b).count());
    assert_eq!(report["epsilon"].as_f64().unwrap(), w.epsilon);
    assert_eq!(report["radius"].as_f64().unwrap(), w.radius);
    assert_eq!(report["modes"][0].as_u64().unwrap() as usize, triple[0]);
    let kinds: Vec<u64> = report["edge_kinds"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    for (k, &count) in kinds.iter().enumerate() {
        assert_eq!(count as usize, w.edges.iter().filter(|e| e.3 as usize == k).count());
    }
    let paths = report["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 2);
    let len = paths.iter().find(|p| p["avoid"] == true).unwrap()["length"].as_f64().unwrap();
    assert!((len - header(&avoid, "length")).abs() < 1e-12);

    // text export of the weighted graph
    let txt = root.join("weighted.txt");
    ok(&cfg, &["export", "--out", txt.to_str().unwrap()]);
    let text = std::fs::read_to_string(&txt).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("edge ")).count(), w.edges.len());
}

#[test]
fn stages_are_reproducible() {
    let (a, cfg_a) = project("");
    let (b, cfg_b) = project("");
    for cfg in [&cfg_a, &cfg_b] {
        ok(cfg, &["sample", "--epsilon", "0.45"]);
        ok(cfg, &["graph"]);
        ok(cfg, &["weight", "--modes-only"]);
    }
    for f in ["graph/sample.fbg", "graph/graph.fbg", "graph/weighted.fbg", "cache.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    // the cache makes a second weighting free and identical
    let before = std::fs::read(a.path().join("graph/weighted.fbg")).unwrap();
    ok(&cfg_a, &["weight", "--modes-only"]);
    assert_eq!(std::fs::read(a.path().join("graph/weighted.fbg")).unwrap(), before);
}

#[test]
fn validation_errors_exit_with_code_two() {
    let (_d, cfg) = project("threshold = -1.0");
    assert_eq!(fivebar(&cfg, &["sample"]).status.code(), Some(2));
    let (_d, cfg) = project("");
    assert_eq!(fivebar(&cfg, &["sample", "--epsilon", "-0.1"]).status.code(), Some(2));
    assert_eq!(fivebar(&cfg, &["prune", "--threshold", "-1"]).status.code(), Some(2));
    assert_eq!(fivebar(&cfg, &["plan"]).status.code(), Some(3));
    let missing = fivebar(Path::new("/nonexistent/fivebar.toml"), &["sample"]);
    assert_eq!(missing.status.code(), Some(2));
}
