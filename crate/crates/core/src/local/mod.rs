//! Per-cell HHO operators.

mod geometry;
mod layout;
mod reconstruction;
mod stabilization;

use faer::Mat;

pub use geometry::{CellGeometry, FacetGeometry};
pub use layout::{DofLayout, LocalVector};
pub use reconstruction::{reconstruction, ReconstructionOp, TraceOps};
pub use stabilization::{stabilization, ResidualBlock, StabilizationOp, StabilizationVariant};

use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::poly::{cell_rule, project_cell, project_facet, CellBasis, FacetBasis, ScalarField, DATA_OVERSAMPLING};

/// Everything the assembly and the estimators need from one cell.
#[derive(Clone, Debug)]
pub struct LocalElement {
    pub geometry: CellGeometry,
    pub layout: DofLayout,
    pub basis: CellBasis,
    pub reconstruction: ReconstructionOp,
    pub traces: TraceOps,
    pub stabilization: StabilizationOp,
    /// `Rᵀ K R + S`.
    pub stiffness: Mat<f64>,
}

impl LocalElement {
    pub fn new(geometry: CellGeometry, layout: DofLayout, variant: StabilizationVariant) -> Result<Self> {
        let basis = CellBasis::new(&geometry.vertices, layout.basis_degree())?;
        let (recon, traces) = reconstruction(&geometry, &layout, &basis)?;
        let stab = stabilization(&geometry, &layout, &recon, &traces, variant)?;
        let stiffness = local_stiffness(&recon, &stab);
        Ok(LocalElement {
            geometry,
            layout,
            basis,
            reconstruction: recon,
            traces,
            stabilization: stab,
            stiffness,
        })
    }

    pub fn from_mesh(mesh: &Mesh, c: usize, layout: DofLayout, variant: StabilizationVariant) -> Result<Self> {
        Self::new(CellGeometry::from_mesh(mesh, c), layout, variant)
    }

    /// Coefficients of `R_T u` in the cell basis.
    pub fn reconstruct(&self, u: &[f64]) -> Vec<f64> {
        let r = &self.reconstruction.matrix;
        (0..r.nrows()).map(|i| (0..r.ncols()).map(|c| r[(i, c)] * u[c]).sum()).collect()
    }

    pub fn interpolate(&self, v: &impl ScalarField) -> Result<LocalVector> {
        interpolate(&self.geometry, &self.layout, &self.basis, v)
    }

    /// `‖∇²R_T u‖²_T`.
    pub fn hessian_energy(&self, u: &[f64]) -> f64 {
        let c = self.reconstruct(u);
        let g = &self.reconstruction.hessian_gram;
        let n = c.len();
        (0..n).map(|i| c[i] * (0..n).map(|j| g[(i, j)] * c[j]).sum::<f64>()).sum()
    }

    pub fn stabilization_energy(&self, u: &[f64]) -> f64 {
        self.stabilization.eval(u)
    }
}

/// Canonical interpolation: projections of `v` onto the cell, facet and
/// normal-derivative spaces (outer normals) and point values at vertices.
pub fn interpolate(geom: &CellGeometry, layout: &DofLayout, basis: &CellBasis, v: &impl ScalarField) -> Result<LocalVector> {
    let mut out = LocalVector::zeros(*layout);
    let qdeg = layout.quadrature_degree() + DATA_OVERSAMPLING;
    let cell = project_cell(basis, &geom.vertices, |p| v.value(p), qdeg)?;
    out.data[..layout.cell_dim()].copy_from_slice(&cell[..layout.cell_dim()]);
    for (i, f) in geom.facets.iter().enumerate() {
        let vals = project_facet(&FacetBasis::new(f.start, f.end, layout.m()), |p| v.value(p), qdeg)?;
        let o = layout.facet_value_offset(i);
        out.data[o..o + vals.len()].copy_from_slice(&vals);
        let nu = f.outward;
        let dn = project_facet(&FacetBasis::new(f.start, f.end, layout.k), |p| v.gradient(p).dot(nu), qdeg)?;
        let o = layout.facet_normal_offset(i);
        out.data[o..o + dn.len()].copy_from_slice(&dn);
    }
    for j in 0..3 {
        out.data[layout.vertex_offset(j)] = v.value(geom.vertices[j]);
    }
    Ok(out)
}

/// `a_T = Rᵀ K R + S`.
pub fn local_stiffness(recon: &ReconstructionOp, stab: &StabilizationOp) -> Mat<f64> {
    let kr = &recon.hessian_gram * &recon.matrix;
    let mut a = recon.matrix.transpose() * kr;
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += stab.matrix[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    a
}

/// Cell block `(f, φ_a)_T`; all other entries vanish.
pub fn local_load(geom: &CellGeometry, layout: &DofLayout, basis: &CellBasis, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; layout.local_dim()];
    let nl = layout.cell_dim();
    for (p, w) in cell_rule(layout.quadrature_degree() + DATA_OVERSAMPLING)?.map(&geom.vertices) {
        let fw = w * f(p);
        if fw == 0.0 {
            continue;
        }
        let table = basis.eval(p, 0)?;
        for a in 0..nl {
            out[a] += fw * table.jets[a].value();
        }
    }
    Ok(out)
}

/// `(u_T, v_T)_T` in the orthonormal cell basis: identity on the cell block.
pub fn local_mass_cell(layout: &DofLayout) -> Mat<f64> {
    let nl = layout.cell_dim();
    Mat::from_fn(layout.local_dim(), layout.local_dim(), |i, j| if i == j && i < nl { 1.0 } else { 0.0 })
}
