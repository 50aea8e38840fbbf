use crate::error::{HhoError, Result};
use crate::local::{interpolate, CellGeometry, DofLayout};
use crate::mesh::Mesh;
use crate::poly::{CellBasis, ScalarField};

/// Global numbering: all cell blocks, then one block per interior facet
/// (values followed by normal derivatives w.r.t. `ν_F`), then one scalar per
/// interior vertex. Boundary unknowns do not exist.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub layout: DofLayout,
    pub num_cells: usize,
    num_facets: usize,
    num_vertices: usize,
    facet_slot: Vec<Option<usize>>,
    vertex_slot: Vec<Option<usize>>,
    pub num_interior_facets: usize,
    pub num_interior_vertices: usize,
}

/// Global index and sign of one local unknown; `None` for boundary unknowns.
pub type LocalMap = Vec<Option<(usize, f64)>>;

impl DofMap {
    pub fn new(mesh: &Mesh, layout: DofLayout) -> DofMap {
        let mut facet_slot = vec![None; mesh.num_facets()];
        let mut next = 0;
        for (f, facet) in mesh.facets.iter().enumerate() {
            if !facet.is_boundary() {
                facet_slot[f] = Some(next);
                next += 1;
            }
        }
        let num_interior_facets = next;
        let mut vertex_slot = vec![None; mesh.num_vertices()];
        next = 0;
        for (v, slot) in vertex_slot.iter_mut().enumerate() {
            if !mesh.is_boundary_vertex(v) {
                *slot = Some(next);
                next += 1;
            }
        }
        DofMap {
            layout,
            num_cells: mesh.num_cells(),
            num_facets: mesh.num_facets(),
            num_vertices: mesh.num_vertices(),
            facet_slot,
            vertex_slot,
            num_interior_facets,
            num_interior_vertices: next,
        }
    }

    /// Fails unless the map was built for a mesh with the same entity counts.
    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.num_cells != mesh.num_cells() || self.num_facets != mesh.num_facets() || self.num_vertices != mesh.num_vertices() {
            return Err(HhoError::LayoutMismatch(format!(
                "dof map for {}/{}/{} cells/facets/vertices used with a mesh of {}/{}/{}",
                self.num_cells,
                self.num_facets,
                self.num_vertices,
                mesh.num_cells(),
                mesh.num_facets(),
                mesh.num_vertices()
            )));
        }
        Ok(())
    }

    fn facet_block(&self) -> usize {
        self.layout.facet_value_dim() + self.layout.facet_normal_dim()
    }

    pub fn cell_dofs(&self) -> usize {
        self.num_cells * self.layout.cell_dim()
    }

    pub fn skeleton_dofs(&self) -> usize {
        self.num_interior_facets * self.facet_block() + self.num_interior_vertices
    }

    pub fn total(&self) -> usize {
        self.cell_dofs() + self.skeleton_dofs()
    }

    pub fn is_cell_dof(&self, i: usize) -> bool {
        i < self.cell_dofs()
    }

    pub fn cell_offset(&self, c: usize) -> usize {
        c * self.layout.cell_dim()
    }

    pub fn facet_value_offset(&self, f: usize) -> Option<usize> {
        self.facet_slot[f].map(|s| self.cell_dofs() + s * self.facet_block())
    }

    pub fn facet_normal_offset(&self, f: usize) -> Option<usize> {
        self.facet_value_offset(f).map(|o| o + self.layout.facet_value_dim())
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_slot[v].map(|s| self.cell_dofs() + self.num_interior_facets * self.facet_block() + s)
    }

    /// Local-to-global map of cell `c` in the local layout order.
    pub fn local_map(&self, mesh: &Mesh, c: usize) -> LocalMap {
        let l = &self.layout;
        let cell = &mesh.cells[c];
        let mut map = vec![None; l.local_dim()];
        let co = self.cell_offset(c);
        for (a, slot) in map.iter_mut().take(l.cell_dim()).enumerate() {
            *slot = Some((co + a, 1.0));
        }
        for i in 0..3 {
            let f = cell.facets[i];
            if let Some(o) = self.facet_value_offset(f) {
                for b in 0..l.facet_value_dim() {
                    map[l.facet_value_offset(i) + b] = Some((o + b, 1.0));
                }
            }
            if let Some(o) = self.facet_normal_offset(f) {
                for b in 0..l.facet_normal_dim() {
                    map[l.facet_normal_offset(i) + b] = Some((o + b, cell.facet_signs[i]));
                }
            }
        }
        for j in 0..3 {
            map[l.vertex_offset(j)] = self.vertex_dof(cell.vertices[j]).map(|g| (g, 1.0));
        }
        map
    }

    /// Local restriction of a global vector.
    pub fn gather(&self, map: &LocalMap, global: &[f64]) -> Vec<f64> {
        map.iter().map(|e| e.map_or(0.0, |(g, s)| s * global[g])).collect()
    }
}

/// Global vector of unknowns in [`DofMap`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct HhoVector {
    pub data: Vec<f64>,
}

impl HhoVector {
    pub fn zeros(dofmap: &DofMap) -> Self {
        HhoVector {
            data: vec![0.0; dofmap.total()],
        }
    }

    pub fn cell<'a>(&'a self, dofmap: &DofMap, c: usize) -> &'a [f64] {
        let o = dofmap.cell_offset(c);
        &self.data[o..o + dofmap.layout.cell_dim()]
    }

    pub fn cell_part<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.data[..dofmap.cell_dofs()]
    }

    pub fn skeleton_part<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.data[dofmap.cell_dofs()..]
    }
}

/// Global interpolation `I_h v`; `v` is assumed to satisfy the clamped
/// boundary conditions, boundary traces are dropped.
pub fn interpolate_global(mesh: &Mesh, dofmap: &DofMap, v: &impl ScalarField) -> Result<HhoVector> {
    dofmap.check(mesh)?;
    let mut out = HhoVector::zeros(dofmap);
    for c in 0..mesh.num_cells() {
        let geom = CellGeometry::from_mesh(mesh, c);
        let basis = CellBasis::new(&geom.vertices, dofmap.layout.basis_degree())?;
        let local = interpolate(&geom, &dofmap.layout, &basis, v)?;
        for (i, e) in dofmap.local_map(mesh, c).into_iter().enumerate() {
            if let Some((g, s)) = e {
                out.data[g] = s * local.data[i];
            }
        }
    }
    Ok(out)
}
