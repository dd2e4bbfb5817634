//! Staged, cached verification of the catalog, lattice, symmetry and
//! classification computations.

pub mod artifacts;
pub mod error;
pub mod pipeline;
pub mod report;
