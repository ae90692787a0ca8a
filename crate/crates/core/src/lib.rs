//! Elementary-submodel machinery over finite structures: a first-order
//! `∈`-language evaluator, Tarski–Vaught hulls, finite ranks of the
//! cumulative hierarchy, and the graph decompositions they drive.

pub mod combinatorics;
pub mod corpus;
pub mod decompose;
pub mod formula;
pub mod graph;
pub mod hull;
pub mod structure;
pub mod universe;
