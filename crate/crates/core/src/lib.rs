//! Exact recomputation of the geometry and Picard lattice of the surface
//! parametrizing perfect cuboids.
//!
//! The surface is the complete intersection in `P^6` (coordinates
//! `a1, a2, a3, b1, b2, b3, c`) of
//!
//! ```text
//! a1² + b1² = c²,  a2² + b2² = c²,  a3² + b3² = c²,  a1² + a2² + a3² = c².
//! ```
//!
//! Everything here is exact: arithmetic happens in `Q(i, √2)` and over `Z`.

pub mod classify;
pub mod error;
pub mod field;
pub mod ideal;
pub mod intersect;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod surface;
pub mod symmetry;

pub use error::{Error, Result};
