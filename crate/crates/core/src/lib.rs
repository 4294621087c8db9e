//! Metric 1-currents at desk scale.

pub mod approximation;
pub mod currents;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod flatnorm;
pub mod geometry;
pub mod homotopy;
pub mod io;
pub mod quadrature;
pub mod rng;
pub mod solvers;
pub mod spaces;
pub mod structure;
pub mod suite;
pub mod transport;

pub use error::{Error, Result};
