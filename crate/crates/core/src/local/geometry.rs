use crate::mesh::{Mesh, Point};

/// Geometry of one local facet as seen from its cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacetGeometry {
    /// Start of the facet parametrization shared by both neighbours.
    pub start: Point,
    pub end: Point,
    pub length: f64,
    /// Outer unit normal of the cell on this facet.
    pub outward: Point,
    /// `ν_F · ν_∂T`.
    pub sign: f64,
}

impl FacetGeometry {
    fn new(start: Point, end: Point, opposite: Point, sign: f64) -> Self {
        let length = (end - start).norm();
        let mut outward = (1.0 / length) * (end - start).rotate_ccw();
        if outward.dot(start - opposite) < 0.0 {
            outward = -1.0 * outward;
        }
        FacetGeometry {
            start,
            end,
            length,
            outward,
            sign,
        }
    }

    pub fn tangent(&self) -> Point {
        (1.0 / self.length) * (self.end - self.start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    pub cell: usize,
    pub vertices: [Point; 3],
    pub diameter: f64,
    pub area: f64,
    /// Local facet `i` is opposite `vertices[i]`.
    pub facets: [FacetGeometry; 3],
}

impl CellGeometry {
    pub fn from_mesh(mesh: &Mesh, c: usize) -> Self {
        let cell = &mesh.cells[c];
        let vertices = mesh.cell_points(c);
        let facets = std::array::from_fn(|i| {
            let [start, end] = mesh.facet_points(cell.facets[i]);
            FacetGeometry::new(start, end, vertices[i], cell.facet_signs[i])
        });
        CellGeometry {
            cell: c,
            vertices,
            diameter: cell.diameter,
            area: cell.area,
            facets,
        }
    }

    /// Standalone triangle; facet `i` runs from vertex `i+1` to vertex `i+2`
    /// and every facet normal is the outer one.
    pub fn from_triangle(vertices: [Point; 3]) -> Self {
        let facets = std::array::from_fn(|i| FacetGeometry::new(vertices[(i + 1) % 3], vertices[(i + 2) % 3], vertices[i], 1.0));
        let diameter = (0..3).map(|i| (vertices[(i + 1) % 3] - vertices[i]).norm()).fold(0.0, f64::max);
        let area = 0.5 * (vertices[1] - vertices[0]).cross(vertices[2] - vertices[0]).abs();
        CellGeometry {
            cell: 0,
            vertices,
            diameter,
            area,
            facets,
        }
    }

    /// Local facets that contain local vertex `j`, each paired with the unit
    /// tangent pointing out of the facet at that vertex.
    pub fn vertex_facets(&self, j: usize) -> [(usize, Point); 2] {
        std::array::from_fn(|n| {
            let i = (j + 1 + n) % 3;
            // facet i joins vertices i+1 and i+2; the endpoint other than j
            let other = if (i + 1) % 3 == j { (i + 2) % 3 } else { (i + 1) % 3 };
            let e = self.vertices[j] - self.vertices[other];
            (i, (1.0 / e.norm()) * e)
        })
    }

    /// `h_T² |F| / |T|`.
    pub fn facet_weight(&self, i: usize) -> f64 {
        self.diameter * self.diameter * self.facets[i].length / self.area
    }

    /// `h_T² / |F|` (2D ridge weight).
    pub fn ridge_weight(&self, i: usize) -> f64 {
        self.diameter * self.diameter / self.facets[i].length
    }
}
