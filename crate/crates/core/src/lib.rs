//! Balanced linear systems over the integers and prime fields: structure,
//! slice-rank style upper bounds, dominant-reduction lower bounds, sphere-set
//! constructions and an exhaustive oracle for small cases.

pub mod bounds;
pub mod catalog;
pub mod cli;
pub mod dominance;
pub mod eqsys;
pub mod error;
pub mod lattice;
pub mod oracle;
pub mod selftest;
pub mod structure;

pub use eqsys::{parse_system, reduce_mod_p, FpSystem, ZEquation, ZSystem};
pub use error::{Error, Result};
