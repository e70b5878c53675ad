//! Correction of approximate equivariant structures on finite-dimensional
//! matrix algebras.
//!
//! The crate takes approximate group representations, approximate
//! coboundaries, approximately permuted projection families and
//! approximately graded representations, and returns exact structures close
//! to them, certifying the quantitative bounds of the averaging, logarithm
//! and polar-decomposition iterations along the way.

pub mod cocycle;
pub mod error;
pub mod galg;
pub mod graded;
pub mod groups;
pub mod homcorrect;
pub mod matca;
pub mod relations;
pub mod sample;

pub use error::{Error, Result};
pub use matca::{CMatrix, C64};
