use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::SparseColMat;
use faer::{Mat, Side};

use super::assemble::sparse_mul;
use crate::error::{HhoError, Result};

/// Sparse Cholesky factor of an SPD matrix.
pub struct SpdFactor {
    matrix: SparseColMat<usize, f64>,
    llt: Option<Llt<usize, f64>>,
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdFactor").field("dim", &self.matrix.nrows()).finish()
    }
}

impl SpdFactor {
    pub fn new(matrix: &SparseColMat<usize, f64>, context: &str) -> Result<SpdFactor> {
        let llt = if matrix.nrows() == 0 {
            None
        } else {
            Some(matrix.sp_cholesky(Side::Lower).map_err(|_| HhoError::NotPositiveDefinite {
                context: context.to_string(),
            })?)
        };
        Ok(SpdFactor {
            matrix: matrix.clone(),
            llt,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Solves with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let Some(llt) = &self.llt else { return Vec::new() };
        let n = b.len();
        let mut x = llt.solve(Mat::from_fn(n, 1, |i, _| b[i]));
        let ax = sparse_mul(&self.matrix, &(0..n).map(|i| x[(i, 0)]).collect::<Vec<_>>());
        let r = Mat::from_fn(n, 1, |i, _| b[i] - ax[i]);
        let dx = llt.solve(r);
        for i in 0..n {
            x[(i, 0)] += dx[(i, 0)];
        }
        (0..n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves for several right-hand sides at once, without refinement.
    pub fn solve_many(&self, b: &Mat<f64>) -> Mat<f64> {
        match &self.llt {
            Some(llt) => llt.solve(b),
            None => Mat::zeros(0, b.ncols()),
        }
    }
}

/// Direct solve of an SPD system; non-positive pivots are reported.
pub fn solve_spd(matrix: &SparseColMat<usize, f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let x = SpdFactor::new(matrix, "solve_spd")?.solve(rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(HhoError::NotPositiveDefinite {
            context: "solve_spd produced a non-finite solution".into(),
        });
    }
    Ok(x)
}

/// Dense SPD solve.
pub fn solve_spd_dense(matrix: &Mat<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let llt = matrix.llt(Side::Lower).map_err(|_| HhoError::NotPositiveDefinite {
        context: "dense solve".into(),
    })?;
    let x = llt.solve(Mat::from_fn(n, 1, |i, _| rhs[i]));
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// `‖A x − b‖ / ‖b‖`.
pub fn relative_residual(matrix: &SparseColMat<usize, f64>, x: &[f64], b: &[f64]) -> f64 {
    let ax = sparse_mul(matrix, x);
    let r: f64 = ax.iter().zip(b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}
