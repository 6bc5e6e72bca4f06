//! Symmetric central and balanced configurations of the n-body problem.
//!
//! The pipeline is: pick a finite group ([`catalog`]), choose orbit types
//! ([`strata`], [`burnside`]), build a reduced search space ([`reduction`]),
//! and solve ([`solver`], [`balanced`]). Every solution can be re-checked in
//! the full space ([`nbody`]) and dynamically ([`dynamics`]).

pub mod balanced;
pub mod burnside;
pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod group;
pub mod io;
pub mod linalg;
pub mod nbody;
pub mod reduction;
pub mod solver;
pub mod strata;

pub use burnside::BurnsideType;
pub use catalog::{catalog_group, parse_group};
pub use error::{Error, Result};
pub use group::{FiniteGroup, OrthogonalMatrix, Subgroup};
pub use nbody::Configuration;
pub use reduction::{ReducedPoint, Slot, SymmetricAnsatz};
pub use strata::{StrataTable, TopoRef};
