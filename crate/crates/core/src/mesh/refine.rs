use std::collections::HashMap;

use super::{Mesh, Point};

/// Result of a refinement step.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub mesh: Mesh,
    /// Parent cell (in the coarse mesh) of every fine cell.
    pub parent: Vec<usize>,
}

impl Refinement {
    /// Fine cells grouped by coarse parent.
    pub fn children(&self, num_coarse: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); num_coarse];
        for (child, &p) in self.parent.iter().enumerate() {
            out[p].push(child);
        }
        out
    }
}

pub(super) fn refine(mesh: &Mesh, marked: &[usize]) -> Refinement {
    let ref_edge = |c: usize| mesh.cells[c].facets[super::Cell::REFINEMENT_EDGE];

    let mut edge_marked = vec![false; mesh.facets.len()];
    for &c in marked {
        edge_marked[ref_edge(c)] = true;
    }
    // closure: a cell with any marked side must bisect its refinement edge
    loop {
        let mut changed = false;
        for (c, cell) in mesh.cells.iter().enumerate() {
            let r = ref_edge(c);
            if !edge_marked[r] && cell.facets.iter().any(|&f| edge_marked[f]) {
                edge_marked[r] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut points: Vec<Point> = mesh.points.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, facet) in mesh.facets.iter().enumerate() {
        if edge_marked[f] {
            let [a, b] = facet.vertices;
            points.push(mesh.points[a].midpoint(mesh.points[b]));
            midpoint.insert((a, b), points.len() - 1);
        }
    }
    let mid_of = |a: usize, b: usize| midpoint.get(&(a.min(b), a.max(b))).copied();

    let mut cells: Vec<[usize; 3]> = Vec::with_capacity(mesh.cells.len() * 2);
    let mut parent = Vec::with_capacity(mesh.cells.len() * 2);
    for (c, cell) in mesh.cells.iter().enumerate() {
        bisect(cell.vertices, &mid_of, &mut |tri| {
            cells.push(tri);
            parent.push(c);
        });
    }

    Refinement {
        mesh: Mesh::from_triangles(points, cells),
        parent,
    }
}

/// `[a, b, c]` has refinement edge `a`–`b`; children `[c, a, m]` and `[b, c, m]`
/// inherit the parent's remaining sides as refinement edges.
fn bisect(tri: [usize; 3], mid_of: &impl Fn(usize, usize) -> Option<usize>, emit: &mut impl FnMut([usize; 3])) {
    let [a, b, c] = tri;
    match mid_of(a, b) {
        None => emit(tri),
        Some(m) => {
            bisect([c, a, m], mid_of, emit);
            bisect([b, c, m], mid_of, emit);
        }
    }
}
