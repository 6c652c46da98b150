//! Simulation laboratory for planar exponential last passage percolation.
//!
//! The crate covers three realizations of the model (bulk i.i.d. weights, the
//! stationary boundary model on the quadrant, and the point-to-line model with
//! a random-walk initial profile), exact dynamic-programming passage times and
//! geodesics, the Burke-property coupling between the two stationary
//! realizations, closed-form moment generating function bounds, and a
//! replicated Monte Carlo harness for tail exponents.
//!
//! Every random object is a pure function of a [`Seed`], so experiments are
//! bit-reproducible regardless of how replicates are scheduled across threads.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod coupling;
pub mod environment;
pub mod error;
pub mod lattice;
pub mod montecarlo;
pub mod passage;
pub mod shape;
pub mod stats;

pub use environment::{BoundaryProfile, Density, PointToLineModel, Seed, Variant, WeightField};
pub use error::{LppError, Result};
pub use lattice::{Point, Window};
pub use passage::{ExitRecord, GeodesicPath, PassageTable};
pub use shape::CharacteristicSpec;

/// Crate version, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
