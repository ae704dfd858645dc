//! Piecewise-affine Lyapunov candidates and their sublevel sets.

mod level;
mod oracle;
mod pwa;
mod quadratic;

pub use level::{
    certified_level, certified_level_outside, level_set_polylines, level_set_segments, sublevel_contains, ExtendedSublevel, LevelSegment,
};
pub use oracle::{decrease_margin, sanity_check};
pub use pwa::{pwa_interpolate, Piece, PwaFunction};
pub use quadratic::QuadraticForm;

pub(crate) use pwa::affine_through;


use thiserror::Error;

use crate::dynamics::DynamicsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("point is outside every cell")]
    NotInDomain,
    #[error("{pieces} pieces for {cells} cells")]
    PieceCountMismatch { cells: usize, pieces: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("function is not finite at vertex {vertex}")]
    NonFiniteVertexValue { vertex: usize },
    #[error("cell {cell} is degenerate")]
    DegenerateCell { cell: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("no certified cells")]
    NoCertifiedCells,
    #[error("vector field has no Lipschitz bound")]
    MissingLipschitz,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
