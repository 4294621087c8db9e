//! Molecules, polyhedral 1-chains, curve fragments and test forms.

pub mod chain;
pub mod closed_set;
pub mod forms;
pub mod fragment;
pub mod molecule;
pub mod polyline;

pub use chain::{Chain1, GraphChain, Piece, PlaneChain};
pub use closed_set::{ClosedSet, Primitive};
pub use forms::{ScalarFn, TestForm};
pub use fragment::{restrict_chain, restrict_polyline, Fragment, FragmentChain};
pub use molecule::{AtomPoint, Molecule, BALANCE_TOL};
pub use polyline::{ParamPath, Polyline};
