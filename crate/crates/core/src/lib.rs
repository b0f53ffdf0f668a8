//! Simulation and exact computation for the East and Modified East
//! kinetically constrained models on `Z^d_+`.
//!
//! * [`lattice`]: the box `Λ_L`, orientation order and oriented edges.
//! * [`dynamics`]: event-driven graphical construction and its observables.
//! * [`fpp`]: the exact `p = 0` first passage reduction.
//! * [`percolation`]: oriented bond/site percolation estimates.
//! * [`constants`]: closed-form scalars (`β_c`, `β_T`, `α_T`, ...).
//! * [`mixing`]: exact total-variation curves and Monte Carlo mixing
//!   diagnostics.
//!
//! Randomness comes from a [`RandomSource`] whose clock substreams are
//! addressed by vertex or edge, so different boxes, dimensions and
//! algorithms that touch the same clock see the same draws.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fpp;
pub mod lattice;
pub mod mixing;
pub mod percolation;
pub mod replicas;
pub mod source;
pub mod stats;

pub use dynamics::{Configuration, Flavor, ModelParams, TrajectoryStats};
pub use error::{Error, Result};
pub use lattice::{LatticeBox, OrientedEdge, Vertex};
pub use source::{ClockKey, RandomSource};
pub use stats::{EstimateCI, Moments};

/// Version string embedded in output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
