//! Project configuration file (TOML).
//!
//! ```toml
//! seed = 7
//! parallelism = 4
//! # epsilon = 0.12      # default: 0.99 * W / 2
//! # threshold = 0.6     # default: r(epsilon)
//!
//! [design]
//! A = [0.259, 0.586]
//! B = [0.060, 0.590]
//! l1 = 0.465
//! l2 = 0.349
//! l3 = 0.249
//! l4 = 0.411
//! p = 0.049
//! q = 0.328
//!
//! [paths]
//! cache = "cache.json"
//! graph = "graph"
//! output = "out"
//! ```

use std::path::{Path, PathBuf};

use fivebar_core::FiveBarDesign;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    #[serde(rename = "A")]
    pub a: [f64; 2],
    #[serde(rename = "B")]
    pub b: [f64; 2],
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub p: f64,
    pub q: f64,
}

impl From<&DesignSection> for FiveBarDesign {
    fn from(s: &DesignSection) -> Self {
        FiveBarDesign {
            a_x: s.a[0],
            a_y: s.a[1],
            b_x: s.b[0],
            b_y: s.b[1],
            l1: s.l1,
            l2: s.l2,
            l3: s.l3,
            l4: s.l4,
            p: s.p,
            q: s.q,
        }
    }
}

impl From<&FiveBarDesign> for DesignSection {
    fn from(d: &FiveBarDesign) -> Self {
        DesignSection {
            a: [d.a_x, d.a_y],
            b: [d.b_x, d.b_y],
            l1: d.l1,
            l2: d.l2,
            l3: d.l3,
            l4: d.l4,
            p: d.p,
            q: d.q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    #[serde(default = "default_cache")]
    pub cache: PathBuf,
    #[serde(default = "default_graph")]
    pub graph: PathBuf,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_cache() -> PathBuf {
    "cache.json".into()
}

fn default_graph() -> PathBuf {
    "graph".into()
}

fn default_output() -> PathBuf {
    "out".into()
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            cache: default_cache(),
            graph: default_graph(),
            output: default_output(),
        }
    }
}

fn default_parallelism() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub design: DesignSection,
    pub epsilon: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub paths: PathsSection,
}

impl ProjectConfig {
    pub fn new(design: &FiveBarDesign) -> Self {
        ProjectConfig {
            design: design.into(),
            epsilon: None,
            threshold: None,
            seed: 0,
            parallelism: default_parallelism(),
            paths: PathsSection::default(),
        }
    }

    /// Reads and validates a config; relative paths are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.to_owned(),
                source,
            },
            other => other,
        })?;
        if let Some(dir) = path.parent() {
            cfg.paths.rebase(dir);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ProjectConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: PathBuf::new(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(ConfigError::Invalid(format!("epsilon must be positive, got {e}")));
            }
        }
        if let Some(t) = self.threshold {
            if !(t >= 0.0) {
                return Err(ConfigError::Invalid(format!("threshold must be non-negative, got {t}")));
            }
        }
        if self.parallelism == 0 {
            return Err(ConfigError::Invalid("parallelism must be at least 1".into()));
        }
        self.design()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn design(&self) -> FiveBarDesign {
        (&self.design).into()
    }
}

impl PathsSection {
    fn rebase(&mut self, dir: &Path) {
        for p in [&mut self.cache, &mut self.graph, &mut self.output] {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}
