use std::path::Path;

use fivebar::config::{ConfigError, ProjectConfig};
use fivebar_core::FiveBarDesign;

const CASE_1: &str = r#"
seed = 7
parallelism = 2

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

#[test]
fn table_values_parse() {
    let cfg = ProjectConfig::parse(CASE_1).unwrap();
    assert_eq!(cfg.design(), FiveBarDesign::CASE_1);
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.parallelism, 2);
    assert_eq!(cfg.epsilon, None);
    assert_eq!(cfg.threshold, None);
    assert_eq!(cfg.paths.graph, Path::new("graph"));
}

#[test]
fn serialised_config_reads_back() {
    let mut cfg = ProjectConfig::new(&FiveBarDesign::CASE_2);
    cfg.epsilon = Some(0.1);
    cfg.threshold = Some(0.5);
    let back = ProjectConfig::parse(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn invalid_values_are_rejected() {
    let bad = [
        format!("epsilon = 0.0\n{CASE_1}"),
        format!("epsilon = -1.0\n{CASE_1}"),
        format!("threshold = -0.1\n{CASE_1}"),
        CASE_1.replace("parallelism = 2", "parallelism = 0"),
        CASE_1.replace("l3 = 0.249", "l3 = -0.249"),
        CASE_1.replace("B = [0.060, 0.590]", "B = [0.259, 0.586]"),
    ];
    for text in &bad {
        assert!(matches!(ProjectConfig::parse(text), Err(ConfigError::Invalid(_))), "{text}");
    }
    let missing = CASE_1.replace("q = 0.328", "");
    assert!(matches!(ProjectConfig::parse(&missing), Err(ConfigError::Parse { .. })));
    let unknown = CASE_1.replace("q = 0.328", "q = 0.328\nr = 1.0");
    assert!(matches!(ProjectConfig::parse(&unknown), Err(ConfigError::Parse { .. })));
}

#[test]
fn paths_resolve_against_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("project.toml");
    std::fs::write(&file, format!("{CASE_1}\n[paths]\ncache = \"c.json\"\ngraph = \"/abs/graph\"\n")).unwrap();
    let cfg = ProjectConfig::load(&file).unwrap();
    assert_eq!(cfg.paths.cache, dir.path().join("c.json"));
    assert_eq!(cfg.paths.graph, Path::new("/abs/graph"));
    assert_eq!(cfg.paths.output, dir.path().join("out"));
}
