//! Configuration-manifold modelling and singularity-avoiding path planning for
//! planar five-bar linkages.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`fivebar`]: closed-form geometry, forward/inverse kinematics, singularity
//!   functions and velocity ellipses.
//! * [`poly`] and [`systems`]: sparse polynomial systems, the configuration
//!   equations `F`, the input-singularity determinant `g`, and the Fritz John
//!   system used for distance-to-singularity queries.
//! * [`homotopy`]: predictor-corrector continuation with total-degree,
//!   two-homogeneous and parameter homotopies.
//! * [`sampler`], [`graph`]: epsilon-samples of the manifold, feature-size
//!   estimation, radius graphs, clearance pruning and mode partitions.
//! * [`singdist`], [`curve`]: exact segment-to-singularity distances and an
//!   independent curve-tracing oracle.
//! * [`planner`]: A* queries and the searches used by the case studies.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod curve;
pub mod error;
pub mod fivebar;
pub mod graph;
pub mod homotopy;
pub mod math;
pub mod planner;
pub mod poly;
pub mod sampler;
pub mod singdist;
pub mod spatial;
pub mod systems;

pub use error::{Error, Result};
pub use fivebar::{CanonicalDesign, Configuration, FiveBarDesign, Frame, VelocityEllipse};
pub use graph::{ConfigGraph, ModeReport};
pub use homotopy::{StartSet, TrackedSolution, TrackerSettings};
pub use planner::PathResult;
pub use poly::{PolySystem, Polynomial};
pub use sampler::{Bottleneck, EpsilonSample};
pub use systems::FritzJohnSystem;

/// Ambient dimension of the configuration space `z = (x, y, cφ, sφ, cψ, sψ)`.
pub const AMBIENT_DIM: usize = 6;
