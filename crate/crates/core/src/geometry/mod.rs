//! Planar computational geometry: polytopes, polyunions, simplicial
//! tessellations of annular regions, and refinement.

mod mesh;
pub(crate) mod plane;
mod point;
mod polytope;
mod refinement;
mod triangulate;

use thiserror::Error;

pub use mesh::{Cell, Tessellation};
pub use point::{norm, Point};
pub use polytope::{box_polytope, contains, convex_hull, polyunion_subset, scale, Halfspace, Polytope, Polyunion};
pub use refinement::{refine, refine_to_count, refine_to_size};
pub use triangulate::{delaunay_triangulate, shared_vertex_map, tessellate_annulus, SharedVertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lower bound not below upper bound on axis {axis}")]
    InvalidBounds { axis: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("all points coincide")]
    CoincidentPoints,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("refinement factor must exceed 1")]
    InvalidFactor,
    #[error("degenerate (collinear) input")]
    Degenerate,
    #[error("exclusion zone is not contained in the domain")]
    NotContained,
    #[error("origin is not interior to the exclusion zone")]
    OriginNotInterior,
    #[error("seed point {index} lies outside the domain")]
    SeedOutsideDomain { index: usize },
    #[error("refinement region does not meet the tessellation")]
    EmptyRegion,
    #[error("dimension {0} not supported for this operation")]
    UnsupportedDimension(usize),
    #[error("cell {id} has invalid or repeated vertex indices")]
    InvalidCell { id: usize },
    #[error("cell {id} is degenerate")]
    DegenerateCell { id: usize },
}
