//! Generalized eigenproblem `A x = λ B x` with `B` the cell mass.
//!
//! `B` vanishes on the skeleton, so the skeleton is eliminated exactly and the
//! problem becomes `S x_T = λ x_T` for the cell Schur complement `S`. Small
//! problems use a dense eigensolver on `S`; larger ones run Lanczos on `S⁻¹`,
//! applied as the cell part of `A⁻¹ (y, 0)`.

use faer::{Mat, Side};

use super::assemble::{sparse_mul, AssembledSystem};
use super::condense::{condense, CondensedMatrix, Eliminate};
use super::solve::SpdFactor;
use crate::error::{HhoError, Result};

/// Largest number of cell unknowns handled by the dense route.
pub const DENSE_EIGEN_LIMIT: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenRoute {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Full vector with `b_h(x, x) = 1`.
    pub vector: Vec<f64>,
    /// `‖A x − λ B x‖ / ‖A x‖`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    /// Ascending.
    pub pairs: Vec<EigenPair>,
    /// Number of discrete eigenvalues, the dimension of the cell space.
    pub available: usize,
    pub route: EigenRoute,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    pub count: usize,
    pub dense_limit: usize,
    /// Relative Ritz residual demanded from Lanczos.
    pub tolerance: f64,
    pub max_restarts: usize,
}

impl EigenOptions {
    pub fn new(count: usize) -> Self {
        EigenOptions {
            count,
            dense_limit: DENSE_EIGEN_LIMIT,
            tolerance: 1e-10,
            max_restarts: 40,
        }
    }
}

/// Smallest `count` eigenpairs. Eigenvectors are sign-normalized so that
/// their cell block has a nonnegative inner product with `reference`, or,
/// without reference, a nonnegative first significant cell coefficient.
pub fn solve_gevp(system: &AssembledSystem, count: usize, reference: Option<&[f64]>) -> Result<EigenSolution> {
    solve_gevp_with(system, EigenOptions::new(count), reference)
}

pub fn solve_gevp_with(system: &AssembledSystem, opts: EigenOptions, reference: Option<&[f64]>) -> Result<EigenSolution> {
    let nt = system.dofmap.cell_dofs();
    if opts.count > nt || opts.count == 0 {
        return Err(HhoError::EigenCount {
            requested: opts.count,
            available: nt,
        });
    }
    let (route, iterations, mut vectors) = if nt <= opts.dense_limit {
        (EigenRoute::Dense, 0, dense_vectors(system, opts.count)?)
    } else {
        let (it, v) = lanczos_vectors(system, &opts)?;
        (EigenRoute::Lanczos, it, v)
    };
    orthonormalize(&mut vectors, nt);
    let mut pairs: Vec<EigenPair> = vectors
        .into_iter()
        .map(|mut x| {
            let ax = sparse_mul(&system.matrix, &x);
            let value: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
            let sign = sign_of(&x[..nt], reference);
            if sign < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            let residual = residual(system, value, &x);
            EigenPair { value, vector: x, residual }
        })
        .collect();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(EigenSolution {
        pairs,
        available: nt,
        route,
        iterations,
    })
}

/// Full eigenvectors of the smallest eigenvalues via dense skeleton
/// condensation.
fn dense_vectors(system: &AssembledSystem, count: usize) -> Result<Vec<Vec<f64>>> {
    let cond = condense(system, Eliminate::Skeleton)?;
    let CondensedMatrix::Dense(s) = &cond.matrix else { unreachable!() };
    let eig = s.self_adjoint_eigen(Side::Lower).map_err(|_| HhoError::EigenConvergence {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let u = eig.U();
    Ok((0..count)
        .map(|i| {
            let xt: Vec<f64> = (0..s.nrows()).map(|r| u[(r, i)]).collect();
            cond.decondense_homogeneous(&xt)
        })
        .collect())
}

fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919 % 101) as f64 / 101.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

/// Thick-restart Lanczos on `K: y ↦ (A⁻¹ (y, 0))_T` with explicit
/// projection `H = Qᵀ K Q` and full reorthogonalization. On restart the
/// leading Ritz vectors are kept and the last residual direction continues
/// the Krylov sequence.
fn lanczos_vectors(system: &AssembledSystem, opts: &EigenOptions) -> Result<(usize, Vec<Vec<f64>>)> {
    let nt = system.dofmap.cell_dofs();
    let n = system.dim();
    let factor = SpdFactor::new(&system.matrix, "global stiffness")?;
    let apply_full = |y: &[f64]| -> Vec<f64> {
        let mut rhs = vec![0.0; n];
        rhs[..nt].copy_from_slice(y);
        factor.solve(&rhs)
    };
    let count = opts.count;
    let max_dim = (3 * count + 60).min(nt);
    let keep = (count + 20).min(max_dim / 2).max(count);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut next = start_vector(nt);
    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    let mut restarts = 0;
    loop {
        let mut image = apply_full(&next);
        image.truncate(nt);
        iterations += 1;
        let col: Vec<f64> = q.iter().map(|qi| dot(qi, &image)).collect();
        let diag = dot(&next, &image);
        for (row, c) in h.iter_mut().zip(&col) {
            row.push(*c);
        }
        let mut row = col;
        row.push(diag);
        h.push(row);
        q.push(next);
        w.push(image);
        let m = q.len();

        let mut r = w[m - 1].clone();
        for _ in 0..2 {
            for qi in &q {
                let c = dot(&r, qi);
                axpy(&mut r, -c, qi);
            }
        }
        let rnorm = dot(&r, &r).sqrt();
        let exhausted = m == nt || rnorm <= 1e-13 * diag.abs();
        if m < count || !(m % 5 == 0 || exhausted || m == max_dim) {
            next = r.into_iter().map(|x| x / rnorm).collect();
            continue;
        }

        let hm = Mat::from_fn(m, m, |i, j| 0.5 * (h[i][j] + h[j][i]));
        let eig = hm.self_adjoint_eigen(Side::Lower).map_err(|_| HhoError::EigenConvergence {
            iterations,
            residual: last_residual,
        })?;
        let theta = eig.S().column_vector().to_owned();
        let s = eig.U();
        let ritz = |i: usize, basis: &[Vec<f64>]| -> Vec<f64> {
            let mut x = vec![0.0; nt];
            for (r, b) in basis.iter().enumerate() {
                axpy(&mut x, s[(r, i)], b);
            }
            x
        };
        // descending order of K's eigenvalues
        let order: Vec<usize> = (0..m).rev().collect();
        let mut worst = 0.0f64;
        let mut vectors = Vec::with_capacity(count);
        for &i in order.iter().take(count) {
            let y = ritz(i, &q);
            let mut res = ritz(i, &w);
            axpy(&mut res, -theta[i], &y);
            worst = worst.max(dot(&res, &res).sqrt() / theta[i].abs());
            vectors.push(y);
        }
        last_residual = worst;
        if worst <= opts.tolerance || exhausted {
            return Ok((iterations, vectors.iter().map(|y| apply_full(y)).collect()));
        }
        if m == max_dim {
            if restarts == opts.max_restarts {
                break;
            }
            restarts += 1;
            let kept: Vec<usize> = order.iter().copied().take(keep).collect();
            let new_q: Vec<Vec<f64>> = kept.iter().map(|&i| ritz(i, &q)).collect();
            let new_w: Vec<Vec<f64>> = kept.iter().map(|&i| ritz(i, &w)).collect();
            h = new_q.iter().map(|qi| new_w.iter().map(|wj| dot(qi, wj)).collect()).collect();
            q = new_q;
            w = new_w;
            // the residual direction is orthogonal to the old basis, hence to
            // the kept Ritz vectors; reorthogonalize once more for safety
            for qi in &q {
                let c = dot(&r, qi);
                axpy(&mut r, -c, qi);
            }
        }
        let rn = dot(&r, &r).sqrt();
        next = r.into_iter().map(|x| x / rn).collect();
    }
    Err(HhoError::EigenConvergence {
        iterations,
        residual: last_residual,
    })
}

/// Modified Gram–Schmidt in the cell inner product; the same combinations
/// are applied to the skeleton parts.
fn orthonormalize(vectors: &mut [Vec<f64>], nt: usize) {
    for i in 0..vectors.len() {
        for j in 0..i {
            let c = dot(&vectors[i][..nt], &vectors[j][..nt]);
            let (head, tail) = vectors.split_at_mut(i);
            axpy(&mut tail[0], -c, &head[j]);
        }
        let norm = dot(&vectors[i][..nt], &vectors[i][..nt]).sqrt();
        vectors[i].iter_mut().for_each(|v| *v /= norm);
    }
}

fn sign_of(cell: &[f64], reference: Option<&[f64]>) -> f64 {
    if let Some(r) = reference {
        let d = dot(cell, r);
        if d != 0.0 {
            return d.signum();
        }
    }
    let max = cell.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    cell.iter().find(|v| v.abs() > 1e-8 * max).map_or(1.0, |v| v.signum())
}

/// `‖A x − λ B x‖ / ‖A x‖`.
pub fn residual(system: &AssembledSystem, lambda: f64, x: &[f64]) -> f64 {
    let nt = system.dofmap.cell_dofs();
    let mut r = sparse_mul(&system.matrix, x);
    let ax = dot(&r, &r).sqrt();
    for i in 0..nt {
        r[i] -= lambda * x[i];
    }
    dot(&r, &r).sqrt() / ax
}
