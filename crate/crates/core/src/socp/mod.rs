//! The learning problem as a second-order cone program.

mod export;
mod extract;
mod problem;
mod solver;
mod verify;

pub use export::{read_problem, write_problem};
pub use extract::{extract_candidate, polish, SlackMap};
pub use problem::{
    assemble, continuity_pairs, select_data, ConeBlock, ConeKind, ConicProblem, ProblemSpec, RowCounts, VariableIndex,
};
pub use solver::{solve, ClarabelSolver, ConicSolution, ConicSolver, SolveStatus, SolverOutput};
pub use verify::{verify_solution, VerificationReport};

use thiserror::Error;

use crate::lyapunov::LyapunovError;

/// Feasibility tolerance for re-verified solutions.
pub const TOL_FEAS: f64 = 1e-6;
/// Objective tolerance.
pub const TOL_OBJ: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SocpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("tessellation has no cells")]
    EmptyCells,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("selection has {found} entries for {cells} cells")]
    SelectionLength { cells: usize, found: usize },
    #[error("cell {cell} selects no data")]
    EmptySelection { cell: usize },
    #[error("cell {cell} selects datum {datum}, which does not exist")]
    DatumOutOfRange { cell: usize, datum: usize },
    #[error("problem carries no variable index")]
    MissingIndex,
    #[error("solver: {0}")]
    Solver(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
}
