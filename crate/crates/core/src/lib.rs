//! Exact subset-sum concentration, range, iterated sumsets, and
//! verification of the anticoncentration inequalities built on them.

pub mod cli;
pub mod error;
pub mod frontier;
pub mod lemmas;
pub mod numerics;
pub mod subsetsum;
pub mod sumsets;

pub use error::{Error, Result};
