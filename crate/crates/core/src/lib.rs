//! Least-fixed-point semantics for combinational and sequential circuits.
//!
//! Wires carry values of lifted flat domains, gates are monotone functions,
//! feedback is the local least fixed point, and sequential circuits are run
//! tick by tick with past values frozen. The crate also ships a netlist
//! language, totality and equivalence checks, and an exhaustive checker for
//! the traced-category laws of the feedback operator.

pub mod domain;
pub mod gates;
pub mod circuit;
pub mod eval;
pub mod sim;
pub mod analysis;
pub mod laws;
pub mod lifted;
pub mod generate;
pub mod netlist;
pub mod stream;
