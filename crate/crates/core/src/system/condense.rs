use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::assemble::AssembledSystem;
use super::solve::SpdFactor;
use crate::error::{HhoError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eliminate {
    /// Block-diagonal cell elimination; leaves a sparse skeleton system.
    Cells,
    /// Skeleton elimination; leaves a dense system on the cell unknowns.
    Skeleton,
}

#[derive(Clone, Debug)]
pub enum CondensedMatrix {
    Sparse(SparseColMat<usize, f64>),
    Dense(Mat<f64>),
}

impl CondensedMatrix {
    pub fn dim(&self) -> usize {
        match self {
            CondensedMatrix::Sparse(m) => m.nrows(),
            CondensedMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        match self {
            CondensedMatrix::Sparse(m) => m.to_dense(),
            CondensedMatrix::Dense(m) => m.clone(),
        }
    }
}

#[derive(Debug)]
struct CellElimination {
    /// `A_TT⁻¹` of the cell block.
    inverse: Mat<f64>,
    /// Signed coupling `A_TS`, one column per retained local skeleton unknown.
    coupling: Mat<f64>,
    /// Skeleton numbers of those columns.
    skeleton: Vec<usize>,
}

#[derive(Debug)]
enum BackSubstitution {
    Cells(Vec<CellElimination>),
    Skeleton { factor: SpdFactor, coupling: Mat<f64> },
}

/// Schur complement on the retained unknowns plus the data to recover the
/// eliminated ones.
#[derive(Debug)]
pub struct CondensedSystem {
    pub eliminated: Eliminate,
    pub matrix: CondensedMatrix,
    pub rhs: Vec<f64>,
    num_cell_dofs: usize,
    eliminated_rhs: Vec<f64>,
    back: BackSubstitution,
}

pub fn condense(system: &AssembledSystem, eliminate: Eliminate) -> Result<CondensedSystem> {
    match eliminate {
        Eliminate::Cells => condense_cells(system),
        Eliminate::Skeleton => condense_skeleton(system),
    }
}

fn condense_cells(system: &AssembledSystem) -> Result<CondensedSystem> {
    let dm = &system.dofmap;
    let nt = dm.cell_dofs();
    let ns = dm.skeleton_dofs();
    let nl = dm.layout.cell_dim();
    let mut triplets = Vec::new();
    let mut rhs: Vec<f64> = system.rhs[nt..].to_vec();
    let mut cells = Vec::with_capacity(system.elements.len());
    for (c, (el, map)) in system.elements.iter().zip(&system.local_maps).enumerate() {
        let a = &el.stiffness;
        let att = Mat::from_fn(nl, nl, |i, j| a[(i, j)]);
        let llt = att.llt(Side::Lower).map_err(|_| HhoError::NotPositiveDefinite {
            context: format!("cell block {c}"),
        })?;
        let inverse = llt.solve(Mat::<f64>::identity(nl, nl));
        let retained: Vec<(usize, usize, f64)> = map
            .iter()
            .enumerate()
            .skip(nl)
            .filter_map(|(i, e)| e.map(|(g, s)| (i, g - nt, s)))
            .collect();
        let coupling = Mat::from_fn(nl, retained.len(), |r, q| retained[q].2 * a[(r, retained[q].0)]);
        // S_loc = A_SS − A_ST A_TT⁻¹ A_TS
        let w = &inverse * &coupling;
        let correction = coupling.transpose() * &w;
        for (p, &(i, gi, si)) in retained.iter().enumerate() {
            for (q, &(j, gj, sj)) in retained.iter().enumerate() {
                triplets.push(Triplet::new(gi, gj, si * sj * a[(i, j)] - correction[(p, q)]));
            }
        }
        let rt = &system.rhs[dm.cell_offset(c)..dm.cell_offset(c) + nl];
        for (q, &(_, g, _)) in retained.iter().enumerate() {
            rhs[g] -= (0..nl).map(|r| w[(r, q)] * rt[r]).sum::<f64>();
        }
        cells.push(CellElimination {
            inverse,
            coupling,
            skeleton: retained.iter().map(|r| r.1).collect(),
        });
    }
    let matrix = SparseColMat::try_new_from_triplets(ns, ns, &triplets).map_err(|e| HhoError::LayoutMismatch(format!("{e:?}")))?;
    Ok(CondensedSystem {
        eliminated: Eliminate::Cells,
        matrix: CondensedMatrix::Sparse(matrix),
        rhs,
        num_cell_dofs: nt,
        eliminated_rhs: system.rhs[..nt].to_vec(),
        back: BackSubstitution::Cells(cells),
    })
}

/// Sparse skeleton block `A_SS` and dense coupling `A_ST`.
pub(crate) fn skeleton_blocks(system: &AssembledSystem) -> Result<(SparseColMat<usize, f64>, Mat<f64>)> {
    let nt = system.dofmap.cell_dofs();
    let ns = system.dofmap.skeleton_dofs();
    let mut ss = Vec::new();
    let mut st = Mat::<f64>::zeros(ns, nt);
    let (ptr, idx, val) = (system.matrix.col_ptr(), system.matrix.row_idx(), system.matrix.val());
    for j in 0..system.dim() {
        for p in ptr[j]..ptr[j + 1] {
            let i = idx[p];
            if i >= nt && j >= nt {
                ss.push(Triplet::new(i - nt, j - nt, val[p]));
            } else if i >= nt {
                st[(i - nt, j)] += val[p];
            }
        }
    }
    let ass = SparseColMat::try_new_from_triplets(ns, ns, &ss).map_err(|e| HhoError::LayoutMismatch(format!("{e:?}")))?;
    Ok((ass, st))
}

fn condense_skeleton(system: &AssembledSystem) -> Result<CondensedSystem> {
    let dm = &system.dofmap;
    let nt = dm.cell_dofs();
    let (ass, ast) = skeleton_blocks(system)?;
    let factor = SpdFactor::new(&ass, "skeleton block")?;
    // X = A_SS⁻¹ A_ST, S = A_TT − A_STᵀ X
    let x = factor.solve_many(&ast);
    let mut s = ast.transpose() * &x;
    for v in s.as_mut().col_iter_mut().flat_map(|c| c.iter_mut()) {
        *v = -*v;
    }
    let nl = dm.layout.cell_dim();
    for (c, el) in system.elements.iter().enumerate() {
        let o = dm.cell_offset(c);
        for i in 0..nl {
            for j in 0..nl {
                s[(o + i, o + j)] += el.stiffness[(i, j)];
            }
        }
    }
    for i in 0..nt {
        for j in 0..i {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    let rs = &system.rhs[nt..];
    let y = factor.solve(rs);
    let rhs = (0..nt)
        .map(|j| system.rhs[j] - (0..y.len()).map(|i| ast[(i, j)] * y[i]).sum::<f64>())
        .collect();
    Ok(CondensedSystem {
        eliminated: Eliminate::Skeleton,
        matrix: CondensedMatrix::Dense(s),
        rhs,
        num_cell_dofs: nt,
        eliminated_rhs: rs.to_vec(),
        back: BackSubstitution::Skeleton { factor, coupling: ast },
    })
}

impl CondensedSystem {
    /// Full vector from a solution of the condensed system.
    pub fn decondense(&self, reduced: &[f64]) -> Vec<f64> {
        self.decondense_with(reduced, &self.eliminated_rhs)
    }

    /// Full vector with a zero right-hand side on the eliminated block (the
    /// map used for eigenvectors).
    pub fn decondense_homogeneous(&self, reduced: &[f64]) -> Vec<f64> {
        self.decondense_with(reduced, &vec![0.0; self.eliminated_rhs.len()])
    }

    fn decondense_with(&self, reduced: &[f64], eliminated_rhs: &[f64]) -> Vec<f64> {
        let nt = self.num_cell_dofs;
        match &self.back {
            BackSubstitution::Cells(cells) => {
                let mut full = vec![0.0; nt + reduced.len()];
                full[nt..].copy_from_slice(reduced);
                let mut o = 0;
                for cell in cells {
                    let nl = cell.inverse.nrows();
                    let r: Vec<f64> = (0..nl)
                        .map(|i| eliminated_rhs[o + i] - (0..cell.skeleton.len()).map(|q| cell.coupling[(i, q)] * reduced[cell.skeleton[q]]).sum::<f64>())
                        .collect();
                    for i in 0..nl {
                        full[o + i] = (0..nl).map(|j| cell.inverse[(i, j)] * r[j]).sum();
                    }
                    o += nl;
                }
                full
            }
            BackSubstitution::Skeleton { factor, coupling } => {
                let ns = factor.dim();
                let r: Vec<f64> = (0..ns)
                    .map(|i| eliminated_rhs[i] - (0..nt).map(|j| coupling[(i, j)] * reduced[j]).sum::<f64>())
                    .collect();
                let xs = factor.solve(&r);
                let mut full = reduced.to_vec();
                full.extend(xs);
                full
            }
        }
    }

    /// Solves the condensed system and recovers the full solution.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let reduced = match &self.matrix {
            CondensedMatrix::Sparse(m) => super::solve::solve_spd(m, &self.rhs)?,
            CondensedMatrix::Dense(m) => super::solve::solve_spd_dense(m, &self.rhs)?,
        };
        Ok(self.decondense(&reduced))
    }
}
