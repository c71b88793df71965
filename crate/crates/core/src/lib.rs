//! Monte Carlo laboratory for Bouchaud trap models.
//!
//! The crate simulates the continuous-time trap chain on five graph
//! families, estimates two-time aging functions, and checks them against
//! the limit objects they converge to: the generalised arcsine law, the
//! FIN singular diffusion, fractional kinetics and stable subordinators.
//!
//! Layout follows the data flow of an experiment:
//! [`heavy_tails`] (streams and depth laws) feeds [`landscape`] (depths and
//! rates on a [`graphs::Graph`]), which drives [`walker`]; [`observables`]
//! turns trajectories into estimates, compared against [`levy`] and
//! [`scaling`] references. [`diagnostics`] probes the intermediate
//! ingredients and [`harness`] runs named experiments end to end.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod graphs;
pub mod harness;
pub mod heavy_tails;
pub mod landscape;
pub mod levy;
pub mod observables;
pub mod scaling;
pub mod special;
pub mod stats;
pub mod walker;

pub use error::{Error, Result};
pub use graphs::{Graph, Vertex};
pub use heavy_tails::{DepthLaw, SeededStream};
pub use landscape::{TopSet, TrapLandscape};
pub use walker::{ClockPath, WalkerState};
