//! Local Hessian reconstruction.
//!
//! For every local unknown the reconstruction `R_T v ∈ P_{k+2}(T)` solves
//!
//! ```text
//! (∇²R_T v, ∇²p)_T = (v_T, Δ²p)_T − (v_F, ∂_nΔp + ∂_ttn p)_∂T + (β_F, ∂_nn p)_∂T
//!                    + Σ_F Σ_{x ∈ ∂F} v(x) ∂_e ∂_n p(x)
//! ```
//!
//! for all `p ∈ P_{k+2}(T)`, where `e` is the unit tangent pointing out of `F`
//! at its endpoint `x`. The affine kernel is fixed with Lagrange multipliers
//! for `∫_T R_T v = ∫_T v_T` and `∫_T ∇R_T v = ∫_∂T v_F ν_∂T`.

use faer::linalg::solvers::Solve;
use faer::Mat;

use super::geometry::CellGeometry;
use super::layout::DofLayout;
use crate::error::{HhoError, Result};
use crate::poly::{cell_rule, facet_rule, CellBasis, FacetBasis};

/// Maps local unknowns to coefficients of `R_T v` in the first
/// `dim P_{k+2}` functions of the cell basis.
#[derive(Clone, Debug)]
pub struct ReconstructionOp {
    /// `dim P_{k+2} × local_dim`.
    pub matrix: Mat<f64>,
    /// Hessian Gram matrix `(∇²ψ_i, ∇²ψ_j)_T` of the reconstruction basis.
    pub hessian_gram: Mat<f64>,
}

/// Trace operators of the reconstruction basis.
#[derive(Clone, Debug)]
pub struct TraceOps {
    /// `(χ_b, ψ_i)_F`, one `(m+1) × dim P_{k+2}` block per local facet.
    pub value: [Mat<f64>; 3],
    /// `(ξ_c, ∂_n ψ_i)_F` with the outer normal, `(k+1) × dim P_{k+2}`.
    pub normal: [Mat<f64>; 3],
    /// `ψ_i(x_j)`, `3 × dim P_{k+2}`.
    pub vertex: Mat<f64>,
}

pub fn reconstruction(geom: &CellGeometry, layout: &DofLayout, basis: &CellBasis) -> Result<(ReconstructionOp, TraceOps)> {
    let n = layout.reconstruction_dim();
    let nl = layout.cell_dim();
    let nloc = layout.local_dim();
    let (m, k) = (layout.m(), layout.k);
    let qdeg = layout.quadrature_degree();

    let mut gram = Mat::<f64>::zeros(n, n);
    let mut rhs = Mat::<f64>::zeros(n, nloc);
    let mut cons = Mat::<f64>::zeros(3, n);
    let mut cons_rhs = Mat::<f64>::zeros(3, nloc);

    for (p, w) in cell_rule(qdeg)?.map(&geom.vertices) {
        let table = basis.eval(p, 4)?;
        let jets = &table.jets;
        for i in 0..n {
            for j in 0..=i {
                let v = w * jets[i].hessian_inner(&jets[j]);
                gram[(i, j)] += v;
                if i != j {
                    gram[(j, i)] += v;
                }
            }
            let bilap = w * jets[i].bilaplacian();
            for a in 0..nl {
                rhs[(i, a)] += bilap * jets[a].value();
            }
            cons[(0, i)] += w * jets[i].value();
            cons[(1, i)] += w * jets[i].partial(1, 0);
            cons[(2, i)] += w * jets[i].partial(0, 1);
        }
        for a in 0..nl {
            cons_rhs[(0, a)] += w * jets[a].value();
        }
    }

    let mut value: [Mat<f64>; 3] = std::array::from_fn(|_| Mat::zeros(m + 1, n));
    let mut normal: [Mat<f64>; 3] = std::array::from_fn(|_| Mat::zeros(k + 1, n));
    for (fi, facet) in geom.facets.iter().enumerate() {
        let nu = facet.outward;
        let t = facet.tangent();
        let fb = FacetBasis::new(facet.start, facet.end, k.max(m));
        let vo = layout.facet_value_offset(fi);
        let no = layout.facet_normal_offset(fi);
        for (s, p, w) in facet_rule(qdeg)?.map(facet.start, facet.end) {
            let chi = fb.eval(s);
            let table = basis.eval(p, 3)?;
            for i in 0..n {
                let jet = &table.jets[i];
                let flux = jet.normal_laplacian(nu) + jet.third(t, t, nu);
                let dnn = jet.second(nu, nu);
                let dn = jet.directional(nu);
                for b in 0..=m {
                    rhs[(i, vo + b)] -= w * chi[b] * flux;
                    value[fi][(b, i)] += w * chi[b] * jet.value();
                }
                for c in 0..=k {
                    rhs[(i, no + c)] += w * chi[c] * dnn;
                    normal[fi][(c, i)] += w * chi[c] * dn;
                }
            }
            for b in 0..=m {
                cons_rhs[(1, vo + b)] += w * chi[b] * nu.x;
                cons_rhs[(2, vo + b)] += w * chi[b] * nu.y;
            }
        }
    }

    let mut vertex = Mat::<f64>::zeros(3, n);
    for j in 0..3 {
        let table = basis.eval(geom.vertices[j], 2)?;
        let col = layout.vertex_offset(j);
        for i in 0..n {
            vertex[(j, i)] = table.jets[i].value();
            for (fi, e) in geom.vertex_facets(j) {
                rhs[(i, col)] += table.jets[i].second(e, geom.facets[fi].outward);
            }
        }
    }

    // equilibrate constraint rows against the Hessian block
    let kmax = (0..n).map(|i| gram[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let cmax = (0..3).flat_map(|r| (0..n).map(move |i| (r, i))).map(|(r, i)| cons[(r, i)].abs()).fold(0.0, f64::max);
    let scale = if cmax > 0.0 { kmax / cmax } else { 1.0 };

    let size = n + 3;
    let mut saddle = Mat::<f64>::zeros(size, size);
    let mut sys_rhs = Mat::<f64>::zeros(size, nloc);
    for i in 0..n {
        for j in 0..n {
            saddle[(i, j)] = gram[(i, j)];
        }
        for c in 0..nloc {
            sys_rhs[(i, c)] = rhs[(i, c)];
        }
    }
    for r in 0..3 {
        for i in 0..n {
            saddle[(n + r, i)] = scale * cons[(r, i)];
            saddle[(i, n + r)] = scale * cons[(r, i)];
        }
        for c in 0..nloc {
            sys_rhs[(n + r, c)] = scale * cons_rhs[(r, c)];
        }
    }
    let sol = saddle.partial_piv_lu().solve(&sys_rhs);

    let singular = || HhoError::SingularReconstruction { cell: geom.cell };
    let mut residual = 0.0f64;
    let mut norm = 0.0f64;
    let check = &saddle * &sol - &sys_rhs;
    for c in 0..nloc {
        for r in 0..size {
            if !sol[(r, c)].is_finite() {
                return Err(singular());
            }
            residual = residual.max(check[(r, c)].abs());
            norm = norm.max(sys_rhs[(r, c)].abs());
        }
    }
    if residual > 1e-8 * norm.max(kmax) {
        return Err(singular());
    }

    let matrix = Mat::from_fn(n, nloc, |i, c| sol[(i, c)]);
    Ok((
        ReconstructionOp {
            matrix,
            hessian_gram: gram,
        },
        TraceOps { value, normal, vertex },
    ))
}
