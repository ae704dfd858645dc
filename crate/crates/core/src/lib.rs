//! Certified regions of attraction from vector-field samples.
//!
//! A piecewise-affine Lyapunov candidate is learned on a triangulation of
//! `X \ A` by second-order cone programming. Cells whose decrease cannot be
//! certified are enclosed in a convex hull `C`, and the procedure is repeated
//! on an upscaled copy of `C` with a smaller exclusion zone until the
//! uncertified part falls inside the original `A`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod geometry;
pub mod lyapunov;
pub mod refine;
pub mod scalar;
pub mod socp;

pub use scalar::{Scalar, TOL_CONT, TOL_GEO, VOL_MIN};

pub type Point = geometry::Point<f64>;
pub type Polytope = geometry::Polytope<f64>;
pub type Polyunion = geometry::Polyunion<f64>;
pub type Tessellation = geometry::Tessellation<f64>;
pub type Sample = dynamics::Sample<f64>;
pub type Dataset = dynamics::Dataset<f64>;
pub type Piece = lyapunov::Piece<f64>;
pub type PwaFunction = lyapunov::PwaFunction<f64>;
pub type QuadraticForm = lyapunov::QuadraticForm<f64>;
