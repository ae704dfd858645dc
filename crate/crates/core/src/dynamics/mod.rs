//! Vector fields, sample datasets and the learnability test.

mod dataset;
mod field;
mod generate;
mod io;
mod simulate;

pub use dataset::{check_learnability, CoverageReport, Dataset, Sample};
pub use field::{evaluate, pendulum, van_der_pol, FnField, LinearField, Pendulum, VanDerPol, VectorField};
pub use generate::{generate_dataset, DataGenerator, Generated, SamplingStrategy};
pub use io::{load_dataset, save_dataset};
pub use simulate::simulate_trajectory;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector field returned a non-finite value")]
    NonFiniteValue,
    #[error("sample {index} has a non-finite entry")]
    NonFiniteSample { index: usize },
    #[error("samples {first} and {second} coincide")]
    DuplicateSample { first: usize, second: usize },
    #[error("Lipschitz bound must be positive and finite")]
    InvalidLipschitz,
    #[error("sample count must be at least 1")]
    InvalidCount,
    #[error("time step must be positive and smaller than the horizon")]
    InvalidStep,
    #[error("trajectory diverged at step {step}")]
    Diverged { step: usize },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("i/o: {0}")]
    Io(String),
}
