use crate::error::{HhoError, Result};
use crate::poly::dim_p2;

/// Polynomial degrees of the local unknowns.
///
/// Local vectors are laid out as: cell block, the three facet-value blocks,
/// the three normal-derivative blocks, and the three vertex scalars. Local
/// facet `i` is opposite local vertex `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLayout {
    /// Degree of the facet normal-derivative unknowns.
    pub k: usize,
    /// Degree of the cell unknowns.
    pub ell: usize,
}

impl DofLayout {
    /// `ell = None` selects the default `k + 2`.
    pub fn new(k: usize, ell: Option<usize>) -> Result<Self> {
        let ell = ell.unwrap_or(k + 2);
        let min = k.saturating_sub(2);
        if ell < min {
            return Err(HhoError::InvalidParameter {
                name: "ell",
                reason: format!("cell degree {ell} is below max(k-2, 0) = {min}"),
            });
        }
        Ok(Self { k, ell })
    }

    /// Degree of the facet-value unknowns, `max(k-1, 0)`.
    pub fn m(&self) -> usize {
        self.k.saturating_sub(1)
    }

    pub fn reconstruction_degree(&self) -> usize {
        self.k + 2
    }

    /// Degree of the cell basis shared by cell unknowns and reconstructions.
    pub fn basis_degree(&self) -> usize {
        self.ell.max(self.k + 2)
    }

    pub fn cell_dim(&self) -> usize {
        dim_p2(self.ell)
    }

    pub fn reconstruction_dim(&self) -> usize {
        dim_p2(self.k + 2)
    }

    pub fn facet_value_dim(&self) -> usize {
        self.m() + 1
    }

    pub fn facet_normal_dim(&self) -> usize {
        self.k + 1
    }

    pub fn local_dim(&self) -> usize {
        self.cell_dim() + 3 * (self.facet_value_dim() + self.facet_normal_dim()) + 3
    }

    pub fn facet_value_offset(&self, i: usize) -> usize {
        self.cell_dim() + i * self.facet_value_dim()
    }

    pub fn facet_normal_offset(&self, i: usize) -> usize {
        self.cell_dim() + 3 * self.facet_value_dim() + i * self.facet_normal_dim()
    }

    pub fn vertex_offset(&self, j: usize) -> usize {
        self.cell_dim() + 3 * (self.facet_value_dim() + self.facet_normal_dim()) + j
    }

    /// Exactness of cell and facet rules for all bilinear forms.
    pub fn quadrature_degree(&self) -> usize {
        2 * self.basis_degree() + 2
    }
}

/// Coefficients of one local unknown vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalVector {
    pub layout: DofLayout,
    pub data: Vec<f64>,
}

impl LocalVector {
    pub fn zeros(layout: DofLayout) -> Self {
        Self {
            layout,
            data: vec![0.0; layout.local_dim()],
        }
    }

    pub fn cell(&self) -> &[f64] {
        &self.data[..self.layout.cell_dim()]
    }

    pub fn facet_value(&self, i: usize) -> &[f64] {
        let o = self.layout.facet_value_offset(i);
        &self.data[o..o + self.layout.facet_value_dim()]
    }

    pub fn facet_normal(&self, i: usize) -> &[f64] {
        let o = self.layout.facet_normal_offset(i);
        &self.data[o..o + self.layout.facet_normal_dim()]
    }

    pub fn vertex(&self, j: usize) -> f64 {
        self.data[self.layout.vertex_offset(j)]
    }
}
