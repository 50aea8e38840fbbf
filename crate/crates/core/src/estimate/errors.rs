use std::f64::consts::PI;

use crate::error::Result;
use crate::mesh::Point;
use crate::poly::{cell_rule, project_cell, ScalarField, DATA_OVERSAMPLING};
use crate::system::AssembledSystem;

/// Exact solution with its biharmonic load.
pub trait Manufactured: ScalarField {
    /// `Δ²u`.
    fn load(&self, p: Point) -> f64;
}

/// `u = sin²(πx) sin²(πy)` on the unit square.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SinSquared;

fn s(t: f64) -> [f64; 5] {
    // sin²(πt) = (1 − cos 2πt)/2 and its derivatives
    let (sn, cs) = (2.0 * PI * t).sin_cos();
    let w = 2.0 * PI;
    [0.5 * (1.0 - cs), 0.5 * w * sn, 0.5 * w * w * cs, -0.5 * w.powi(3) * sn, -0.5 * w.powi(4) * cs]
}

impl ScalarField for SinSquared {
    fn value(&self, p: Point) -> f64 {
        s(p.x)[0] * s(p.y)[0]
    }

    fn gradient(&self, p: Point) -> Point {
        let (sx, sy) = (s(p.x), s(p.y));
        Point::new(sx[1] * sy[0], sx[0] * sy[1])
    }

    fn hessian(&self, p: Point) -> [f64; 3] {
        let (sx, sy) = (s(p.x), s(p.y));
        [sx[2] * sy[0], sx[1] * sy[1], sx[0] * sy[2]]
    }
}

impl Manufactured for SinSquared {
    fn load(&self, p: Point) -> f64 {
        let (sx, sy) = (s(p.x), s(p.y));
        sx[4] * sy[0] + 2.0 * sx[2] * sy[2] + sx[0] * sy[4]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExactErrors {
    /// `‖∇²_pw(u − R_h u_h)‖`.
    pub energy: f64,
    /// `‖Π^ℓ u − u_T‖`.
    pub l2_cell: f64,
}

pub fn exact_errors(system: &AssembledSystem, u_h: &[f64], u: &dyn ScalarField) -> Result<ExactErrors> {
    let layout = system.dofmap.layout;
    let qdeg = 2 * layout.basis_degree() + 2 * DATA_OVERSAMPLING;
    let nl = layout.cell_dim();
    let (mut energy, mut l2) = (0.0, 0.0);
    for (c, el) in system.elements.iter().enumerate() {
        let local = system.local(c, u_h);
        let r = el.reconstruct(&local);
        for (p, w) in cell_rule(qdeg)?.map(&el.geometry.vertices) {
            let [xx, xy, yy] = u.hessian(p);
            let jet = el.basis.eval_combination(&r, p, 2)?;
            let (dxx, dxy, dyy) = (xx - jet.partial(2, 0), xy - jet.partial(1, 1), yy - jet.partial(0, 2));
            energy += w * (dxx * dxx + 2.0 * dxy * dxy + dyy * dyy);
        }
        let proj = project_cell(&el.basis, &el.geometry.vertices, |p| u.value(p), qdeg)?;
        l2 += (0..nl).map(|a| (proj[a] - local[a]).powi(2)).sum::<f64>();
    }
    Ok(ExactErrors {
        energy: energy.sqrt(),
        l2_cell: l2.sqrt(),
    })
}
