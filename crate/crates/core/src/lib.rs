//! Seiberg–Witten invariants of negative definite plumbed 3-manifolds from
//! the topological Poincaré series, with exact verification of the surgery
//! formulae relating a graph to the components left after deleting vertices.

pub mod cubes;
pub mod error;
pub mod graph;
pub mod intlin;
pub mod io;
pub mod lattice;
pub mod rational;
pub mod report;
pub mod series;
pub mod sw;

pub use error::{Error, Result};
pub use graph::{validate, ClassTable, Component, GraphForest, PlumbingGraph, RawGraph};
pub use lattice::LatticeVector;
pub use rational::Rational;
