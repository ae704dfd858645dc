//! The iterative certification loop and its persisted evidence.

mod config;
mod driver;
mod record;
mod theorem;

pub use config::RunConfig;
pub use driver::{
    find_beta, initial_mesh, run, shrink_a, step, uncertain_hull, uncertified_region, DataSource, FailureReason, StepOutcome, BETA_CAP, TOL_BETA,
};
pub use record::{Diagnostics, IterationState, LevelSetRef, RunRecord, Verdict, SCHEMA_VERSION};
pub use theorem::{check_theorem, TheoremCheck};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::lyapunov::LyapunovError;
use crate::socp::SocpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("config: {0}")]
    Config(String),
    #[error("record: {0}")]
    Record(String),
    #[error("data: {0}")]
    Data(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Socp(#[from] SocpError),
}
