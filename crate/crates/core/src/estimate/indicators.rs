use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::poly::{cell_rule, facet_rule, project_cell, CellBasis, DATA_OVERSAMPLING};
use crate::system::AssembledSystem;

/// Jump contributions of one facet; boundary facets use the one-sided trace.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FacetJumps {
    /// `h_F^{-3} ‖[R_h u_h]‖²_F`.
    pub value: f64,
    /// `h_F^{-1} ‖[∂_n R_h u_h]‖²_F`.
    pub normal: f64,
    /// `h_F ‖[∂_nn R_h u_h]‖²_F`.
    pub normal_normal: f64,
    /// `h_F³ ‖[∂_n Δ R_h u_h]‖²_F`.
    pub normal_laplacian: f64,
}

impl FacetJumps {
    pub fn mu(&self) -> f64 {
        self.value + self.normal
    }

    pub fn extra(&self) -> f64 {
        self.normal_normal + self.normal_laplacian
    }
}

/// Global squared estimator split into its families.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EstimatorComponents {
    pub mu: f64,
    pub stabilization: f64,
    pub oscillation: f64,
    /// Interior `∂_nn` and `∂_nΔ` jumps (cell degree 0 only).
    pub extra_jumps: f64,
    /// `‖h²(f − Δ² R_h u_h)‖²` (cell degree 0 only).
    pub residual: f64,
}

impl EstimatorComponents {
    pub fn total(&self) -> f64 {
        self.mu + self.stabilization + self.oscillation + self.extra_jumps + self.residual
    }
}

/// Per-cell refinement data. Facet terms are attributed to every adjacent
/// cell, so the cell sum exceeds the global estimator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Indicators {
    pub jumps: Vec<f64>,
    pub stabilization: Vec<f64>,
    pub oscillation: Vec<f64>,
    pub extra_jumps: Vec<f64>,
    pub residual: Vec<f64>,
}

impl Indicators {
    fn zeros(n: usize) -> Self {
        Indicators {
            jumps: vec![0.0; n],
            stabilization: vec![0.0; n],
            oscillation: vec![0.0; n],
            extra_jumps: vec![0.0; n],
            residual: vec![0.0; n],
        }
    }

    /// `η(T)²` per cell.
    pub fn squared(&self) -> Vec<f64> {
        (0..self.jumps.len())
            .map(|c| self.jumps[c] + self.stabilization[c] + self.oscillation[c] + self.extra_jumps[c] + self.residual[c])
            .collect()
    }
}

/// Coefficients of `R_T u_h` for every cell.
pub fn reconstructions(system: &AssembledSystem, u: &[f64]) -> Vec<Vec<f64>> {
    system.elements.iter().enumerate().map(|(c, el)| el.reconstruct(&system.local(c, u))).collect()
}

/// Jump table of the piecewise reconstruction over all facets.
pub fn mu_jumps(mesh: &Mesh, system: &AssembledSystem, u: &[f64]) -> Result<Vec<FacetJumps>> {
    let recon = reconstructions(system, u);
    facet_jumps(mesh, system, &recon)
}

fn facet_jumps(mesh: &Mesh, system: &AssembledSystem, recon: &[Vec<f64>]) -> Result<Vec<FacetJumps>> {
    let layout = system.dofmap.layout;
    let rule = facet_rule(2 * layout.reconstruction_degree())?;
    let order = if layout.ell == 0 { 3 } else { 1 };
    let mut out = Vec::with_capacity(mesh.num_facets());
    for (f, facet) in mesh.facets.iter().enumerate() {
        let [a, b] = mesh.facet_points(f);
        let nu = facet.normal;
        let hf = facet.length;
        let mut sums = [0.0; 4];
        for (_, p, w) in rule.map(a, b) {
            let plus = system.elements[facet.plus].basis.eval_combination(&recon[facet.plus], p, order)?;
            let mut jet = plus;
            if let Some(m) = facet.minus {
                let minus = system.elements[m].basis.eval_combination(&recon[m], p, order)?;
                jet.axpy(-1.0, &minus);
            }
            sums[0] += w * jet.value().powi(2);
            sums[1] += w * jet.directional(nu).powi(2);
            if order == 3 && facet.minus.is_some() {
                sums[2] += w * jet.second(nu, nu).powi(2);
                sums[3] += w * jet.normal_laplacian(nu).powi(2);
            }
        }
        out.push(FacetJumps {
            value: sums[0] / hf.powi(3),
            normal: sums[1] / hf,
            normal_normal: hf * sums[2],
            normal_laplacian: hf.powi(3) * sums[3],
        });
    }
    Ok(out)
}

/// `h_T⁴ ‖(1 − Π_T^ℓ) f‖²_T` per cell.
pub fn oscillation(f: &dyn Fn(Point) -> f64, mesh: &Mesh, ell: usize) -> Result<Vec<f64>> {
    let qdeg = 2 * ell + 4 * DATA_OVERSAMPLING;
    (0..mesh.num_cells())
        .map(|c| {
            let v = mesh.cell_points(c);
            let basis = CellBasis::new(&v, ell)?;
            let coeffs = project_cell(&basis, &v, f, qdeg)?;
            let mut s = 0.0;
            for (p, w) in cell_rule(qdeg)?.map(&v) {
                let r = f(p) - basis.eval_combination(&coeffs, p, 0)?.value();
                s += w * r * r;
            }
            Ok(mesh.cells[c].diameter.powi(4) * s)
        })
        .collect()
}

/// Source-problem estimator `η` with per-cell indicators.
pub fn eta_source(mesh: &Mesh, system: &AssembledSystem, u: &[f64], f: &dyn Fn(Point) -> f64) -> Result<(f64, EstimatorComponents, Indicators)> {
    estimate(mesh, system, u, Some(f))
}

/// Eigenproblem estimator `η̂`: jumps and stabilization only.
pub fn eta_eigen(mesh: &Mesh, system: &AssembledSystem, u: &[f64]) -> Result<(f64, EstimatorComponents, Indicators)> {
    estimate(mesh, system, u, None)
}

fn estimate(
    mesh: &Mesh,
    system: &AssembledSystem,
    u: &[f64],
    f: Option<&dyn Fn(Point) -> f64>,
) -> Result<(f64, EstimatorComponents, Indicators)> {
    let layout = system.dofmap.layout;
    let low_order = f.is_some() && layout.ell == 0;
    let recon = reconstructions(system, u);
    let jumps = facet_jumps(mesh, system, &recon)?;
    let n = mesh.num_cells();
    let mut ind = Indicators::zeros(n);
    let mut comp = EstimatorComponents::default();

    for (fj, facet) in jumps.iter().zip(&mesh.facets) {
        comp.mu += fj.mu();
        let cells = std::iter::once(facet.plus).chain(facet.minus);
        if low_order {
            comp.extra_jumps += fj.extra();
        }
        for c in cells {
            ind.jumps[c] += fj.mu();
            if low_order {
                ind.extra_jumps[c] += fj.extra();
            }
        }
    }
    for (c, el) in system.elements.iter().enumerate() {
        let s = el.stabilization_energy(&system.local(c, u));
        ind.stabilization[c] = s;
        comp.stabilization += s;
    }
    if let Some(f) = f {
        if low_order {
            let qdeg = 2 * layout.reconstruction_degree() + 2 * DATA_OVERSAMPLING;
            for (c, el) in system.elements.iter().enumerate() {
                let mut s = 0.0;
                for (p, w) in cell_rule(qdeg)?.map(&el.geometry.vertices) {
                    let r = f(p) - el.basis.eval_combination(&recon[c], p, 4)?.bilaplacian();
                    s += w * r * r;
                }
                let v = el.geometry.diameter.powi(4) * s;
                ind.residual[c] = v;
                comp.residual += v;
            }
        } else {
            ind.oscillation = oscillation(f, mesh, layout.ell)?;
            comp.oscillation = ind.oscillation.iter().sum();
        }
    }
    Ok((comp.total().sqrt(), comp, ind))
}
