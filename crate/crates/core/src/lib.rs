//! Numerical verification of quaternionic Kähler geometry on explicit
//! embedded manifolds.
//!
//! The crate builds quaternionic structure triples on `H^m`, the almost
//! contact metric 3-structure that such a triple induces on an oriented
//! hypersurface, and Riemannian submersions from those hypersurfaces. Every
//! definition is then checked at sample points through tensor residuals
//! computed with finite differences; see [`scenarios`] for the wired-up
//! instances and [`runner`] for the batch verifier behind the `verify` binary.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod hypersurface;
pub mod linalg;
pub mod quaternion;
pub mod report;
pub mod runner;
pub mod sampling;
pub mod scenarios;
pub mod submersion;
pub mod tolerance;

pub use error::{GeomError, Result};
pub use report::CheckReport;
