//! Min-cost flow and linear programming engines.

pub mod mcf;
pub mod simplex;

pub use mcf::{min_cost_flow, Arc, FlowNetwork, FlowSolution};
pub use simplex::{simplex_lp, LinearProgram, LpSolution};
