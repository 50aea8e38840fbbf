//! Global unknowns, assembly, condensation and solvers.

mod assemble;
mod condense;
mod dofmap;
mod eigen;
mod leb;
mod solve;

pub use assemble::{assemble, assemble_with, sparse_mul, write_coordinate, AssembledSystem};
pub use condense::{condense, CondensedMatrix, CondensedSystem, Eliminate};
pub use dofmap::{interpolate_global, DofMap, HhoVector, LocalMap};
pub use eigen::{residual, solve_gevp, solve_gevp_with, EigenOptions, EigenPair, EigenRoute, EigenSolution, DENSE_EIGEN_LIMIT};
pub use leb::{leb, leb_with, stabilization_constant, trace_constant, LowerBound};
pub use solve::{relative_residual, solve_spd, solve_spd_dense, SpdFactor};

use crate::error::Result;

/// Solves the source problem by cell condensation.
pub fn solve_source(system: &AssembledSystem) -> Result<HhoVector> {
    let data = condense(system, Eliminate::Cells)?.solve()?;
    Ok(HhoVector { data })
}
