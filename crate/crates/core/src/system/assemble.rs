use std::io::{self, Write};

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::dofmap::{DofMap, LocalMap};
use crate::error::{HhoError, Result};
use crate::local::{local_load, DofLayout, LocalElement, StabilizationVariant};
use crate::mesh::{Mesh, Point};

/// Global stiffness, cell mass and load with the local data they came from.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub dofmap: DofMap,
    pub variant: StabilizationVariant,
    pub h_max: f64,
    pub elements: Vec<LocalElement>,
    pub local_maps: Vec<LocalMap>,
    /// `a_h`, both triangles stored.
    pub matrix: SparseColMat<usize, f64>,
    /// `b_h`: identity on the cell unknowns, zero elsewhere.
    pub mass: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
}

pub fn assemble(mesh: &Mesh, layout: DofLayout, variant: StabilizationVariant, f: Option<&dyn Fn(Point) -> f64>) -> Result<AssembledSystem> {
    assemble_with(mesh, DofMap::new(mesh, layout), variant, f)
}

pub fn assemble_with(
    mesh: &Mesh,
    dofmap: DofMap,
    variant: StabilizationVariant,
    f: Option<&dyn Fn(Point) -> f64>,
) -> Result<AssembledSystem> {
    dofmap.check(mesh)?;
    if mesh.num_cells() == 0 {
        return Err(HhoError::LayoutMismatch("mesh has no cells".into()));
    }
    let layout = dofmap.layout;
    let n = dofmap.total();
    let nloc = layout.local_dim();
    let mut elements = Vec::with_capacity(mesh.num_cells());
    let mut local_maps = Vec::with_capacity(mesh.num_cells());
    let mut triplets = Vec::with_capacity(mesh.num_cells() * nloc * nloc);
    let mut rhs = vec![0.0; n];
    for c in 0..mesh.num_cells() {
        let el = LocalElement::from_mesh(mesh, c, layout, variant)?;
        let map = dofmap.local_map(mesh, c);
        for (i, ei) in map.iter().enumerate() {
            let Some((gi, si)) = *ei else { continue };
            for (j, ej) in map.iter().enumerate() {
                let Some((gj, sj)) = *ej else { continue };
                triplets.push(Triplet::new(gi, gj, si * sj * el.stiffness[(i, j)]));
            }
        }
        if let Some(f) = f {
            let load = local_load(&el.geometry, &layout, &el.basis, f)?;
            for (i, e) in map.iter().enumerate() {
                if let Some((g, s)) = *e {
                    rhs[g] += s * load[i];
                }
            }
        }
        elements.push(el);
        local_maps.push(map);
    }
    let matrix = SparseColMat::try_new_from_triplets(n, n, &triplets).map_err(|e| HhoError::LayoutMismatch(format!("{e:?}")))?;
    let mass_entries: Vec<_> = (0..dofmap.cell_dofs()).map(|i| Triplet::new(i, i, 1.0)).collect();
    let mass = SparseColMat::try_new_from_triplets(n, n, &mass_entries).map_err(|e| HhoError::LayoutMismatch(format!("{e:?}")))?;
    Ok(AssembledSystem {
        dofmap,
        variant,
        h_max: mesh.h_max(),
        elements,
        local_maps,
        matrix,
        mass,
        rhs,
    })
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.dofmap.total()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        sparse_mul(&self.matrix, x)
    }

    /// Local restriction of a global vector to cell `c`.
    pub fn local(&self, c: usize, x: &[f64]) -> Vec<f64> {
        self.dofmap.gather(&self.local_maps[c], x)
    }

    /// `a_h(x, x)`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn dense_matrix(&self) -> Mat<f64> {
        self.matrix.to_dense()
    }

    /// Coordinate text dump, one `row col value` line per stored entry.
    pub fn write_matrix(&self, out: &mut impl Write) -> io::Result<()> {
        write_coordinate(&self.matrix, out)
    }
}

pub fn sparse_mul(a: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    let (ptr, idx, val) = (a.col_ptr(), a.row_idx(), a.val());
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for p in ptr[j]..ptr[j + 1] {
            y[idx[p]] += val[p] * xj;
        }
    }
    y
}

pub fn write_coordinate(a: &SparseColMat<usize, f64>, out: &mut impl Write) -> io::Result<()> {
    let (ptr, idx, val) = (a.col_ptr(), a.row_idx(), a.val());
    for j in 0..a.ncols() {
        for p in ptr[j]..ptr[j + 1] {
            writeln!(out, "{} {} {:.17e}", idx[p], j, val[p])?;
        }
    }
    Ok(())
}
