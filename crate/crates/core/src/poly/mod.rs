//! Polynomial spaces on cells and facets: bases, quadrature, projections.

pub mod basis;
pub mod field;
pub mod project;
pub mod quadrature;

pub use basis::{dim_p2, monomial_exponents, CellBasis, DerivTable, FacetBasis, Jet};
pub use field::{Polynomial, ScalarField};
pub use project::{project, project_cell, project_facet, project_with, Entity, DATA_OVERSAMPLING};
pub use quadrature::{cell_rule, facet_rule, SegmentRule, TriangleRule};
