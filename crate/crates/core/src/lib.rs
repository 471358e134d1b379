//! Collision-free motion planners for tuples of labelled robots, plus the
//! discrete invariants that bound how many control rules such planners need.
//!
//! The crate provides:
//!
//! - planners producing piecewise closed-form trajectories between labelled
//!   point configurations in Euclidean space ([`euclid`], [`euclid_even`]),
//!   on spheres ([`sphere`]), and on metric trees ([`tree`]);
//! - a combinatorial complex recording the two-particle exchange moves on a
//!   tree ([`qgamma`]);
//! - closed-form calculators for the minimum number of continuity domains a
//!   motion planner can achieve on these spaces ([`tc`]);
//! - a verification harness that checks section exactness, collision
//!   clearance, partition coverage, and continuity of any of the planners
//!   ([`verify`]).
//!
//! Every planner is a pure value: planning the same pair twice yields the
//! same trajectory, and planners are `Send + Sync`.

pub mod euclid;
pub mod euclid_even;
pub mod geometry;
pub mod qgamma;
pub mod sphere;
pub mod tc;
pub mod tree;
pub mod verify;

pub use euclid::{EuclidPlanner, PlanError};
pub use euclid_even::{EuclidEvenPlanner, PairClass};
pub use qgamma::{build_qgamma, QGammaComplex, QGammaError};
pub use sphere::{SphereError, SpherePlanner, SpherePoint, SphereRegion};
pub use geometry::{Configuration, GeometryError, Piece, RegionIndex, Tolerances, Trajectory};
pub use tc::{TcError, TcValue};
pub use tree::{Tree, TreeConfiguration, TreeError, TreePoint, TreeTrajectory};
pub use verify::{CheckReport, ConfigPlanner, PartitionReport, ProbeReport};
