use crate::error::Result;
use crate::mesh::Point;
use crate::poly::basis::{CellBasis, FacetBasis};
use crate::poly::quadrature::{cell_rule, facet_rule};

/// Extra quadrature exactness used for non-polynomial data.
pub const DATA_OVERSAMPLING: usize = 4;

/// Geometric entity carrying an `L²` projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Entity {
    Cell([Point; 3]),
    /// Segment parametrized from the first to the second point.
    Facet([Point; 2]),
    /// Projection onto a point is point evaluation.
    Vertex(Point),
}

/// Coefficients of the `L²` projection of `f` onto polynomials of degree `d`
/// in the orthonormal basis of the entity, using a rule of exactness
/// `2d + DATA_OVERSAMPLING`.
pub fn project(entity: &Entity, f: impl Fn(Point) -> f64, d: usize) -> Result<Vec<f64>> {
    project_with(entity, f, d, 2 * d + DATA_OVERSAMPLING)
}

pub fn project_with(entity: &Entity, f: impl Fn(Point) -> f64, d: usize, quad_degree: usize) -> Result<Vec<f64>> {
    match entity {
        Entity::Cell(v) => {
            let basis = CellBasis::new(v, d)?;
            project_cell(&basis, v, f, quad_degree)
        }
        Entity::Facet([a, b]) => project_facet(&FacetBasis::new(*a, *b, d), f, quad_degree),
        Entity::Vertex(p) => Ok(vec![f(*p)]),
    }
}

pub fn project_cell(basis: &CellBasis, v: &[Point; 3], f: impl Fn(Point) -> f64, quad_degree: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; basis.dim()];
    for (p, w) in cell_rule(quad_degree)?.map(v) {
        let fv = w * f(p);
        for (o, jet) in out.iter_mut().zip(basis.eval(p, 0)?.jets) {
            *o += fv * jet.value();
        }
    }
    Ok(out)
}

pub fn project_facet(basis: &FacetBasis, f: impl Fn(Point) -> f64, quad_degree: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; basis.dim()];
    for (s, p, w) in facet_rule(quad_degree)?.map(basis.start, basis.end) {
        let fv = w * f(p);
        for (o, b) in out.iter_mut().zip(basis.eval(s)) {
            *o += fv * b;
        }
    }
    Ok(out)
}
