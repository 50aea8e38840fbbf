//! Hybrid high-order discretization of the clamped biharmonic problem in 2D.

pub mod error;
pub mod estimate;
pub mod local;
pub mod mesh;
pub mod poly;
pub mod system;

pub use error::{HhoError, Result};
