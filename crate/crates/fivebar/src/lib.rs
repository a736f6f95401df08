//! File formats, caches, parallel clearance evaluation and the pipeline
//! behind the `fivebar` command-line tool.

pub mod cache;
pub mod config;
pub mod export;
pub mod format;
pub mod pipeline;
pub mod service;

pub use config::ProjectConfig;
pub use format::{GraphFile, Stage};
pub use service::ClearanceService;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const MISSING_PREREQUISITE: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// Maps an error chain to an exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use fivebar_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<config::ConfigError>().is_some() {
            return exit::VALIDATION;
        }
        if cause.downcast_ref::<format::FormatError>().is_some() {
            return exit::MISSING_PREREQUISITE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidDesign(_) | E::DegenerateGroundLink | E::InvalidEpsilon(_) | E::InvalidThreshold(_) => {
                    exit::VALIDATION
                }
                _ => exit::NUMERICAL,
            };
        }
        if let Some(e) = cause.downcast_ref::<std::io::Error>() {
            if e.kind() == std::io::ErrorKind::NotFound {
                return exit::MISSING_PREREQUISITE;
            }
        }
    }
    exit::NUMERICAL
}
