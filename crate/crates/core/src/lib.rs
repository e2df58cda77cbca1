//! Orthogonal-vectors to Diameter reductions, built as concrete graphs and
//! configuration machines, with exact tools to verify their distance gaps.

pub mod bits;
pub mod general;
pub mod graph;
pub mod harness;
pub mod ov;
pub mod small;
pub mod stack;

pub use general::{ConcreteConfig, Configuration, EdgeConstraint};
pub use graph::{Graph, GraphBuilder};
pub use ov::{BitVector, OvInstance, OvWitness};
pub use small::{SmallGadget, SmallVertex};
pub use stack::{CoordArray, Stack};
