//! Conforming triangulations of polygonal domains.
//!
//! Every cell stores its vertices in newest-vertex-bisection order: the
//! refinement edge joins `vertices[0]` and `vertices[1]`, and local facet `i`
//! is the side opposite `vertices[i]`. Facet normals are fixed once per facet:
//! boundary facets carry the outer normal of the domain, interior facets the
//! left normal of the segment running from the lower to the higher vertex id.

mod conformity;
mod refine;

use std::collections::HashMap;
use std::io::{self, Write};
use std::ops::{Add, Mul, Sub};

use crate::error::{HhoError, Result};

pub use refine::Refinement;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Counter-clockwise rotation by a quarter turn.
    pub fn rotate_ccw(self) -> Point {
        Point::new(-self.y, self.x)
    }

    /// Clockwise rotation by a quarter turn.
    pub fn rotate_cw(self) -> Point {
        Point::new(self.y, -self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        Point::new(self * rhs.x, self * rhs.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    /// Vertex ids; the refinement edge is `vertices[0]`–`vertices[1]`.
    pub vertices: [usize; 3],
    /// Facet ids; local facet `i` is opposite `vertices[i]`.
    pub facets: [usize; 3],
    /// `ν_F · ν_∂T` on each local facet.
    pub facet_signs: [f64; 3],
    pub diameter: f64,
    pub area: f64,
    /// Diameter over inradius.
    pub shape_regularity: f64,
}

impl Cell {
    /// Local index of the facet that is bisected next.
    pub const REFINEMENT_EDGE: usize = 2;

    pub fn refinement_edge(&self) -> usize {
        Self::REFINEMENT_EDGE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Endpoints with `vertices[0] < vertices[1]`; facet polynomials are
    /// parametrized from the first to the second endpoint.
    pub vertices: [usize; 2],
    pub length: f64,
    pub normal: Point,
    /// `normal` rotated clockwise by a quarter turn.
    pub tangent: Point,
    /// The cell that `normal` points out of.
    pub plus: usize,
    pub minus: Option<usize>,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

/// Domains with built-in initial triangulations.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// `(-1,1)^2 \ [0,1]x[-1,0]`, six triangles around the reentrant corner.
    LShape,
    /// `(0,1)^2`, two triangles split along the diagonal through the origin.
    UnitSquare,
    Custom {
        points: Vec<Point>,
        cells: Vec<[usize; 3]>,
    },
}

impl Domain {
    pub fn area(&self) -> Option<f64> {
        match self {
            Domain::LShape => Some(3.0),
            Domain::UnitSquare => Some(1.0),
            Domain::Custom { .. } => None,
        }
    }
}

/// Interior/boundary entity lists and orientation signs.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityTables {
    pub interior_facets: Vec<usize>,
    pub boundary_facets: Vec<usize>,
    pub interior_vertices: Vec<usize>,
    pub boundary_vertices: Vec<usize>,
    /// `ν_F · ν_∂T` per cell and local facet.
    pub cell_facet_signs: Vec<[f64; 3]>,
    /// Sign of `τ_F` relative to the outward direction of the facet at each
    /// endpoint (the 1D outer normal of the facet).
    pub facet_endpoint_signs: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub points: Vec<Point>,
    pub cells: Vec<Cell>,
    pub facets: Vec<Facet>,
    boundary_vertex: Vec<bool>,
}

impl Mesh {
    pub fn build_initial(domain: &Domain) -> Result<Mesh> {
        match domain {
            Domain::LShape => {
                let points = vec![
                    Point::new(0.0, 0.0),
                    Point::new(1.0, 0.0),
                    Point::new(1.0, 1.0),
                    Point::new(0.0, 1.0),
                    Point::new(-1.0, 1.0),
                    Point::new(-1.0, 0.0),
                    Point::new(-1.0, -1.0),
                    Point::new(0.0, -1.0),
                ];
                let cells = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 7]];
                Ok(Mesh::from_triangles(points, cells).with_longest_edges())
            }
            Domain::UnitSquare => {
                let points = vec![
                    Point::new(0.0, 0.0),
                    Point::new(1.0, 0.0),
                    Point::new(1.0, 1.0),
                    Point::new(0.0, 1.0),
                ];
                Ok(Mesh::from_triangles(points, [[0, 1, 2], [0, 2, 3]]).with_longest_edges())
            }
            Domain::Custom { points, cells } => {
                for (c, tri) in cells.iter().enumerate() {
                    if tri.iter().any(|&v| v >= points.len()) {
                        return Err(HhoError::InvalidMesh(format!("cell {c} references a missing vertex")));
                    }
                    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                        return Err(HhoError::InvalidMesh(format!("cell {c} repeats a vertex")));
                    }
                    let area = signed_area(points[tri[0]], points[tri[1]], points[tri[2]]);
                    if !(area.abs() > 0.0) {
                        return Err(HhoError::InvalidMesh(format!("cell {c} is degenerate")));
                    }
                }
                if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                    return Err(HhoError::InvalidMesh("non-finite coordinate".into()));
                }
                conformity::check(points, cells)?;
                let mesh = Mesh::from_triangles(points.clone(), cells.iter().copied()).with_longest_edges();
                mesh.check_edge_multiplicity()?;
                Ok(mesh)
            }
        }
    }

    /// Builds entity tables for triangles whose vertex order is taken as given.
    pub fn from_triangles(points: Vec<Point>, cells: impl IntoIterator<Item = [usize; 3]>) -> Mesh {
        let vertex_lists: Vec<[usize; 3]> = cells.into_iter().collect();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::with_capacity(vertex_lists.len() * 2);
        let mut edge_cells: Vec<(usize, Option<usize>)> = Vec::new();
        let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
        let mut cell_facets = Vec::with_capacity(vertex_lists.len());
        for (c, v) in vertex_lists.iter().enumerate() {
            let mut facets = [0usize; 3];
            for (i, facet) in facets.iter_mut().enumerate() {
                let a = v[(i + 1) % 3];
                let b = v[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edge_cells.push((c, None));
                    edge_vertices.push([key.0, key.1]);
                    edge_cells.len() - 1
                });
                if edge_cells[id].0 != c {
                    edge_cells[id].1 = Some(c);
                }
                *facet = id;
            }
            cell_facets.push(facets);
        }

        let centroid = |c: usize| {
            let v = vertex_lists[c];
            (1.0 / 3.0) * (points[v[0]] + points[v[1]] + points[v[2]])
        };

        let mut facets = Vec::with_capacity(edge_vertices.len());
        for (id, ends) in edge_vertices.iter().enumerate() {
            let p0 = points[ends[0]];
            let p1 = points[ends[1]];
            let length = (p1 - p0).norm();
            let tangent = (1.0 / length) * (p1 - p0);
            let mut normal = tangent.rotate_ccw();
            let (first, second) = edge_cells[id];
            let mid = p0.midpoint(p1);
            let outward_of_first = normal.dot(mid - centroid(first)) > 0.0;
            let (plus, minus) = match second {
                None => {
                    if !outward_of_first {
                        normal = -1.0 * normal;
                    }
                    (first, None)
                }
                Some(second) => {
                    if outward_of_first {
                        (first, Some(second))
                    } else {
                        (second, Some(first))
                    }
                }
            };
            facets.push(Facet {
                vertices: *ends,
                length,
                normal,
                tangent: normal.rotate_cw(),
                plus,
                minus,
            });
        }

        let mut boundary_vertex = vec![false; points.len()];
        for f in facets.iter().filter(|f| f.is_boundary()) {
            boundary_vertex[f.vertices[0]] = true;
            boundary_vertex[f.vertices[1]] = true;
        }

        let cells = vertex_lists
            .iter()
            .zip(cell_facets)
            .enumerate()
            .map(|(c, (v, fs))| {
                let (p0, p1, p2) = (points[v[0]], points[v[1]], points[v[2]]);
                let area = signed_area(p0, p1, p2).abs();
                let sides = [(p2 - p1).norm(), (p0 - p2).norm(), (p1 - p0).norm()];
                let diameter = sides.iter().cloned().fold(0.0, f64::max);
                let inradius = 2.0 * area / (sides[0] + sides[1] + sides[2]);
                let mut facet_signs = [0.0; 3];
                for i in 0..3 {
                    facet_signs[i] = if facets[fs[i]].plus == c { 1.0 } else { -1.0 };
                }
                Cell {
                    vertices: *v,
                    facets: fs,
                    facet_signs,
                    diameter,
                    area,
                    shape_regularity: diameter / inradius,
                }
            })
            .collect();

        Mesh {
            points,
            cells,
            facets,
            boundary_vertex,
        }
    }

    /// Rotates every cell so that its longest side becomes the refinement edge.
    fn with_longest_edges(self) -> Mesh {
        let points = self.points;
        let cells: Vec<[usize; 3]> = self
            .cells
            .iter()
            .map(|c| longest_edge_first(&c.vertices, &[points[c.vertices[0]], points[c.vertices[1]], points[c.vertices[2]]]))
            .collect();
        Mesh::from_triangles(points, cells)
    }

    fn check_edge_multiplicity(&self) -> Result<()> {
        let mut count: HashMap<usize, Vec<usize>> = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            for &f in &cell.facets {
                count.entry(f).or_default().push(c);
            }
        }
        let mut bad: Vec<_> = count.into_iter().filter(|(_, cs)| cs.len() > 2).collect();
        bad.sort();
        if let Some((f, cs)) = bad.first() {
            return Err(HhoError::NonConforming {
                first: cs[0],
                second: cs[2],
                reason: format!("side {f} is shared by more than two cells"),
            });
        }
        Ok(())
    }

    /// Exhaustive pairwise test for overlaps and hanging vertices.
    pub fn check_conformity(&self) -> Result<()> {
        let cells: Vec<[usize; 3]> = self.cells.iter().map(|c| c.vertices).collect();
        conformity::check(&self.points, &cells)?;
        self.check_edge_multiplicity()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        let v = self.cells[c].vertices;
        [self.points[v[0]], self.points[v[1]], self.points[v[2]]]
    }

    pub fn centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_points(c);
        (1.0 / 3.0) * (a + b + d)
    }

    pub fn facet_points(&self, f: usize) -> [Point; 2] {
        let v = self.facets[f].vertices;
        [self.points[v[0]], self.points[v[1]]]
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn max_shape_regularity(&self) -> f64 {
        self.cells.iter().map(|c| c.shape_regularity).fold(0.0, f64::max)
    }

    pub fn classify(&self) -> EntityTables {
        let (boundary_facets, interior_facets): (Vec<usize>, Vec<usize>) =
            (0..self.facets.len()).partition(|&f| self.facets[f].is_boundary());
        let (boundary_vertices, interior_vertices): (Vec<usize>, Vec<usize>) =
            (0..self.points.len()).partition(|&v| self.boundary_vertex[v]);
        let facet_endpoint_signs = self
            .facets
            .iter()
            .map(|f| {
                let [p0, p1] = [self.points[f.vertices[0]], self.points[f.vertices[1]]];
                let s1 = f.tangent.dot(p1 - p0).signum();
                [-s1, s1]
            })
            .collect();
        EntityTables {
            interior_facets,
            boundary_facets,
            interior_vertices,
            boundary_vertices,
            cell_facet_signs: self.cells.iter().map(|c| c.facet_signs).collect(),
            facet_endpoint_signs,
        }
    }

    /// Newest-vertex bisection of the marked cells plus conforming closure.
    pub fn refine(&self, marked: &[usize]) -> Refinement {
        refine::refine(self, marked)
    }

    /// One bisection generation of every cell.
    pub fn refine_all(&self) -> Refinement {
        let all: Vec<usize> = (0..self.cells.len()).collect();
        self.refine(&all)
    }

    /// Two bisection generations of every cell; halves the mesh size.
    pub fn refine_uniform(&self) -> Mesh {
        self.refine_all().mesh.refine_all().mesh
    }

    /// Text export: `cells <n> vertices <m>`, then `x y` per vertex, then
    /// `v0 v1 v2` per cell.
    pub fn write_ascii(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "cells {} vertices {}", self.num_cells(), self.num_vertices())?;
        for p in &self.points {
            writeln!(out, "{:.17e} {:.17e}", p.x, p.y)?;
        }
        for c in &self.cells {
            writeln!(out, "{} {} {}", c.vertices[0], c.vertices[1], c.vertices[2])?;
        }
        Ok(())
    }

    /// Reads the format of [`Mesh::write_ascii`]; the vertex order of each
    /// cell is kept, so refinement edges survive a round trip.
    pub fn read_ascii(text: &str) -> Result<Mesh> {
        let bad = |msg: String| HhoError::InvalidMesh(msg);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty mesh file".into()))?.split_whitespace().collect();
        let (n, m) = match header.as_slice() {
            ["cells", n, "vertices", m] => (
                n.parse::<usize>().map_err(|e| bad(format!("cell count: {e}")))?,
                m.parse::<usize>().map_err(|e| bad(format!("vertex count: {e}")))?,
            ),
            _ => return Err(bad("header must read `cells <n> vertices <m>`".into())),
        };
        let mut points = Vec::with_capacity(m);
        for i in 0..m {
            let line = lines.next().ok_or_else(|| bad(format!("missing vertex {i}")))?;
            let xy: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| bad(format!("vertex {i}: {e}"))))
                .collect::<Result<_>>()?;
            if xy.len() != 2 {
                return Err(bad(format!("vertex {i} needs two coordinates")));
            }
            points.push(Point::new(xy[0], xy[1]));
        }
        let mut cells = Vec::with_capacity(n);
        for c in 0..n {
            let line = lines.next().ok_or_else(|| bad(format!("missing cell {c}")))?;
            let v: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| bad(format!("cell {c}: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != 3 {
                return Err(bad(format!("cell {c} needs three vertices")));
            }
            cells.push([v[0], v[1], v[2]]);
        }
        if lines.next().is_some() {
            return Err(bad("trailing data after the last cell".into()));
        }
        for (c, tri) in cells.iter().enumerate() {
            if tri.iter().any(|&v| v >= m) {
                return Err(bad(format!("cell {c} references a missing vertex")));
            }
            if !(signed_area(points[tri[0]], points[tri[1]], points[tri[2]]).abs() > 0.0) {
                return Err(bad(format!("cell {c} is degenerate")));
            }
        }
        conformity::check(&points, &cells)?;
        let mesh = Mesh::from_triangles(points, cells);
        mesh.check_edge_multiplicity()?;
        Ok(mesh)
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Cyclic rotation of `tri` that puts its longest side (first one on ties)
/// between the first two entries.
fn longest_edge_first(tri: &[usize; 3], p: &[Point; 3]) -> [usize; 3] {
    // side opposite local vertex i
    let len = |i: usize| (p[(i + 2) % 3] - p[(i + 1) % 3]).norm();
    let mut best = 2;
    for i in [0, 1] {
        if len(i) > len(best) * (1.0 + 1e-12) {
            best = i;
        }
    }
    // rotate so that the vertex opposite the longest side comes last
    let shift = (best + 1) % 3;
    [tri[shift], tri[(shift + 1) % 3], tri[(shift + 2) % 3]]
}
