//! Exact boundary two-point correlation machinery for the planar Ising model
//! with free boundary conditions: even-subgraph polynomials, double random
//! currents, alternating flows on a directed modification of the graph, and
//! the determinant/Pfaffian identities tying them together. All identity
//! checks are exact over arbitrary-precision rationals; the scaling module is
//! the one floating-point corner (critical square-lattice transfer matrices
//! and conformal maps of rectangles).

pub mod corpus;
pub mod currents;
pub mod directed;
pub mod error;
pub mod flows;
pub mod graph;
pub mod ising;
pub mod linalg;
pub mod rational;
pub mod scaling;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{EdgeSet, PlanarGraph};
pub use rational::Rat;
