//! Spectral and geometric upper bounds on the convergence rate of distributed
//! averaging algorithms.
//!
//! The crate builds the stochastic matrices of the Metropolis, Lazy Metropolis,
//! EqualNeighbor and FixedWeight rules from communication graphs, computes
//! exact spectra of reversible matrices, evaluates the cut, path and
//! diameter based bounds on the second eigenvalue, and simulates the
//! resulting dynamics on static and time-varying topologies.

pub mod bounds;
pub mod config;
pub mod error;
pub mod graphs;
pub mod matrices;
pub mod sim;
pub mod spectral;
pub mod table;

pub use bounds::{BoundReport, RateBounds};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use graphs::{DirectedGraph, Family, GraphSchedule, PathFamily, ScheduleKind};
pub use matrices::{PerronVector, Rule, RuleParams, ScheduleInfima, StochasticMatrix};
pub use sim::Trajectory;
pub use spectral::{PiGeometry, Spectrum};
