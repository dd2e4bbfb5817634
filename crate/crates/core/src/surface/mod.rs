//! The singular surface, its nodes and the curve catalog.

pub mod catalog;
pub mod invariants;
pub mod model;
pub mod nodes;
pub mod section;

pub use catalog::{
    build_curve_catalog, field_of_definition, Catalog, CurveKind, CurveRecord, FamilyHyperplane,
    IdealKey,
};
pub use model::{build_surface_model, SurfaceModel};
pub use nodes::{compute_singular_points, NodeRecord};
pub use section::{hyperplane_section_decomposition, SectionDecomposition};
