use faer::Mat;

use super::geometry::CellGeometry;
use super::layout::DofLayout;
use super::reconstruction::{ReconstructionOp, TraceOps};
use crate::error::{HhoError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StabilizationVariant {
    /// Weights `h_T^{-4}, h_T^{-3}, h_T^{-1}, h_T^{-2}`.
    Source,
    /// Weights built from `ℓ_T(F)` and `ℓ_T(E,F)`, scaled by `sigma`.
    Eigen { sigma: f64 },
}

impl StabilizationVariant {
    pub fn eigen(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self::Eigen { sigma })
        } else {
            Err(HhoError::InvalidParameter {
                name: "sigma",
                reason: format!("must be positive, got {sigma}"),
            })
        }
    }
}

/// Residual of one unknown block against the matching trace of `R_T`.
#[derive(Clone, Debug)]
pub struct ResidualBlock {
    pub weight: f64,
    /// `rows × local_dim`.
    pub operator: Mat<f64>,
}

#[derive(Clone, Debug)]
pub struct StabilizationOp {
    pub variant: StabilizationVariant,
    /// Symmetric positive semidefinite `local_dim × local_dim` matrix.
    pub matrix: Mat<f64>,
    /// Weighted residual blocks; `matrix = Σ weight · opᵀ op`.
    pub blocks: Vec<ResidualBlock>,
}

impl StabilizationOp {
    /// `Σ weight · |op u|²`, evaluated block-wise so that the kernel is
    /// resolved to roundoff in the residuals rather than in the matrix.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for b in &self.blocks {
            let op = &b.operator;
            for r in 0..op.nrows() {
                let res: f64 = (0..op.ncols()).map(|c| op[(r, c)] * u[c]).sum();
                s += b.weight * res * res;
            }
        }
        s
    }
}

pub fn stabilization(
    geom: &CellGeometry,
    layout: &DofLayout,
    recon: &ReconstructionOp,
    traces: &TraceOps,
    variant: StabilizationVariant,
) -> Result<StabilizationOp> {
    if let StabilizationVariant::Eigen { sigma } = variant {
        StabilizationVariant::eigen(sigma)?;
    }
    let n = layout.reconstruction_dim();
    let nl = layout.cell_dim();
    let nloc = layout.local_dim();
    let r = &recon.matrix;
    let h = geom.diameter;

    // selection minus trace-of-reconstruction, rows given by `trace` (rows × n)
    let residual = |offset: usize, rows: usize, trace: &dyn Fn(usize, usize) -> f64| {
        let mut op = Mat::<f64>::zeros(rows, nloc);
        for row in 0..rows {
            op[(row, offset + row)] += 1.0;
            for c in 0..nloc {
                let mut acc = 0.0;
                for i in 0..n {
                    let t = trace(row, i);
                    if t != 0.0 {
                        acc += t * r[(i, c)];
                    }
                }
                op[(row, c)] -= acc;
            }
        }
        op
    };

    let mut blocks = Vec::with_capacity(10);
    let cell_op = residual(0, nl, &|row, i| if row == i { 1.0 } else { 0.0 });
    let cell_weight = match variant {
        StabilizationVariant::Source => h.powi(-4),
        StabilizationVariant::Eigen { sigma } => sigma * h.powi(-4),
    };
    blocks.push(ResidualBlock {
        weight: cell_weight,
        operator: cell_op,
    });

    for fi in 0..3 {
        let (value_w, normal_w) = match variant {
            StabilizationVariant::Source => (h.powi(-3), h.powi(-1)),
            StabilizationVariant::Eigen { sigma } => {
                let lf = geom.facet_weight(fi);
                (sigma / (h * h * lf), sigma / lf)
            }
        };
        let vt = &traces.value[fi];
        blocks.push(ResidualBlock {
            weight: value_w,
            operator: residual(layout.facet_value_offset(fi), layout.facet_value_dim(), &|row, i| vt[(row, i)]),
        });
        let nt = &traces.normal[fi];
        blocks.push(ResidualBlock {
            weight: normal_w,
            operator: residual(layout.facet_normal_offset(fi), layout.facet_normal_dim(), &|row, i| nt[(row, i)]),
        });
    }

    for j in 0..3 {
        let weight = match variant {
            StabilizationVariant::Source => h.powi(-2),
            StabilizationVariant::Eigen { sigma } => geom
                .vertex_facets(j)
                .iter()
                .map(|&(fi, _)| sigma / (geom.facet_weight(fi) * geom.ridge_weight(fi)))
                .sum(),
        };
        let vt = &traces.vertex;
        blocks.push(ResidualBlock {
            weight,
            operator: residual(layout.vertex_offset(j), 1, &|_, i| vt[(j, i)]),
        });
    }

    let mut matrix = Mat::<f64>::zeros(nloc, nloc);
    for b in &blocks {
        let g = b.operator.transpose() * &b.operator;
        for i in 0..nloc {
            for j in 0..nloc {
                matrix[(i, j)] += b.weight * g[(i, j)];
            }
        }
    }
    // exact symmetry
    for i in 0..nloc {
        for j in 0..i {
            let avg = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = avg;
            matrix[(j, i)] = avg;
        }
    }
    Ok(StabilizationOp { variant, matrix, blocks })
}
