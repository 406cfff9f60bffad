//! Random measures, point processes and directionally convex (dcx) order tests.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, threads or the command line lives in the `dcx-sim` companion
//! crate; here every Monte-Carlo routine is a pure function of its parameters
//! and an [`RngStream`], and replication loops go through the [`Replicator`]
//! trait so callers can choose serial or parallel execution without changing
//! results.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dist;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod ops;
pub mod ordertest;
pub mod pattern;
pub mod processes;
pub mod rng;
pub mod shotnoise;
pub mod special;
pub mod stats;
pub mod wireless;

pub use error::{Error, Result};
pub use exec::{Replicator, Serial};
pub use geometry::{Cuboid, Topology, Window};
pub use measure::{AtomicMeasure, GridField, Measure};
pub use pattern::{Marks, PointPattern};
pub use rng::RngStream;
