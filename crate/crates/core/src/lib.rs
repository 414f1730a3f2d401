//! Unbiased quantized consensus on graphs: the protocol itself, the coupled
//! two-walker processes that govern its convergence time, exact solvers for
//! the associated Markov chains, spectral checks, closed-form bounds, and
//! time-varying graph schedules.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod time_varying;
pub mod walkers;

pub use error::{Error, Result};
pub use graph::{Graph, GraphFamily, Schedule};
pub use walkers::{Process, WalkerPair};
