use super::Point;
use crate::error::{HhoError, Result};

/// Pairwise test: two cells may only share a common vertex or a common side.
/// Candidate pairs are found with a sweep over bounding boxes.
pub(super) fn check(points: &[Point], cells: &[[usize; 3]]) -> Result<()> {
    let bbox = |c: &[usize; 3]| {
        let xs = c.map(|v| points[v].x);
        let ys = c.map(|v| points[v].y);
        (
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ys.iter().cloned().fold(f64::INFINITY, f64::min),
            ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let boxes: Vec<_> = cells.iter().map(bbox).collect();
    let scale = boxes
        .iter()
        .map(|b| (b.1 - b.0).max(b.3 - b.2))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-10 * scale;

    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0.total_cmp(&boxes[b].0).then(a.cmp(&b)));

    let mut violations: Vec<(usize, usize, String)> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if boxes[j].0 > boxes[i].1 + eps {
                break;
            }
            if boxes[j].2 > boxes[i].3 + eps || boxes[i].2 > boxes[j].3 + eps {
                continue;
            }
            if let Some(reason) = pair_violation(points, &cells[i], &cells[j], eps) {
                violations.push((i.min(j), i.max(j), reason));
            }
        }
    }
    violations.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    match violations.into_iter().next() {
        Some((first, second, reason)) => Err(HhoError::NonConforming { first, second, reason }),
        None => Ok(()),
    }
}

fn pair_violation(points: &[Point], a: &[usize; 3], b: &[usize; 3], eps: f64) -> Option<String> {
    let pa = a.map(|v| points[v]);
    let pb = b.map(|v| points[v]);
    if interiors_overlap(&pa, &pb, eps) {
        return Some("cell interiors overlap".into());
    }
    for (tri, pts, other, other_pts) in [(a, &pa, b, &pb), (b, &pb, a, &pa)] {
        for (k, &v) in other.iter().enumerate() {
            if tri.contains(&v) {
                continue;
            }
            let p = other_pts[k];
            for e in 0..3 {
                let (s, t) = (pts[e], pts[(e + 1) % 3]);
                if on_open_segment(p, s, t, eps) {
                    return Some(format!("vertex {v} hangs on a side of the other cell"));
                }
            }
            if tri.iter().zip(pts.iter()).any(|(_, q)| (*q - p).norm() <= eps) {
                return Some(format!("vertex {v} duplicates a vertex of the other cell"));
            }
        }
    }
    None
}

fn on_open_segment(p: Point, s: Point, t: Point, eps: f64) -> bool {
    let d = t - s;
    let len2 = d.dot(d);
    let lambda = (p - s).dot(d) / len2;
    if lambda <= eps / len2.sqrt() || lambda >= 1.0 - eps / len2.sqrt() {
        return false;
    }
    let foot = s + lambda * d;
    (p - foot).norm() <= eps
}

/// Separating-axis test on the six side normals; touching counts as disjoint.
fn interiors_overlap(a: &[Point; 3], b: &[Point; 3], eps: f64) -> bool {
    for tri in [a, b] {
        for e in 0..3 {
            let axis = (tri[(e + 1) % 3] - tri[e]).rotate_ccw();
            let n = axis.norm();
            let axis = (1.0 / n) * axis;
            let proj = |t: &[Point; 3]| {
                let v = t.map(|p| axis.dot(p));
                (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            };
            let (amin, amax) = proj(a);
            let (bmin, bmax) = proj(b);
            if amax <= bmin + eps || bmax <= amin + eps {
                return false;
            }
        }
    }
    true
}
