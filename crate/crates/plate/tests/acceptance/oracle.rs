//! Brute-force local operators: monomial least squares with explicit
//! constraint rows and term-by-term Gauss quadrature. Only the coordinate
//! functions of the unknowns (cell and facet bases) are taken from the library.

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::Mat;
use hho_core::local::{CellGeometry, DofLayout};
use hho_core::mesh::Point;
use hho_core::poly::{CellBasis, FacetBasis};

use super::quad::{segment_rule, triangle_rule};

/// Scaled monomial `((x - c)/h)^a ((y - c)/h)^b`.
#[derive(Clone, Copy)]
struct Mono {
    a: usize,
    b: usize,
    c: Point,
    h: f64,
}

fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        ((n + 1 - k)..=n).map(|v| v as f64).product()
    }
}

impl Mono {
    fn d(&self, dx: usize, dy: usize, p: Point) -> f64 {
        if dx > self.a || dy > self.b {
            return 0.0;
        }
        let (x, y) = ((p.x - self.c.x) / self.h, (p.y - self.c.y) / self.h);
        falling(self.a, dx) * falling(self.b, dy) * x.powi((self.a - dx) as i32) * y.powi((self.b - dy) as i32) / self.h.powi((dx + dy) as i32)
    }

    fn value(&self, p: Point) -> f64 {
        self.d(0, 0, p)
    }

    /// Third derivative along `u, v, w`.
    fn d3(&self, u: Point, v: Point, w: Point, p: Point) -> f64 {
        let mut s = 0.0;
        for (i, ui) in [u.x, u.y].into_iter().enumerate() {
            for (j, vj) in [v.x, v.y].into_iter().enumerate() {
                for (l, wl) in [w.x, w.y].into_iter().enumerate() {
                    let nx = [i, j, l].iter().filter(|&&t| t == 0).count();
                    s += ui * vj * wl * self.d(nx, 3 - nx, p);
                }
            }
        }
        s
    }

    fn d2(&self, u: Point, v: Point, p: Point) -> f64 {
        u.x * v.x * self.d(2, 0, p) + (u.x * v.y + u.y * v.x) * self.d(1, 1, p) + u.y * v.y * self.d(0, 2, p)
    }

    fn grad(&self, p: Point) -> Point {
        Point::new(self.d(1, 0, p), self.d(0, 1, p))
    }
}

fn monomials(deg: usize, c: Point, h: f64) -> Vec<Mono> {
    let mut out = Vec::new();
    for d in 0..=deg {
        for b in 0..=d {
            out.push(Mono { a: d - b, b, c, h });
        }
    }
    out
}

struct Facet {
    start: Point,
    end: Point,
    len: f64,
    normal: Point,
}

pub struct OracleOps {
    /// `(R e_c)(x_s)` for sample points `x_s` and local unknowns `c`.
    pub recon_values: Mat<f64>,
    pub stab_source: Mat<f64>,
    pub stab_eigen: Mat<f64>,
}

fn gram_quadratic_form(gram: &Mat<f64>, moments: &Mat<f64>) -> Mat<f64> {
    let x = gram.partial_piv_lu().solve(moments);
    moments.transpose() * &x
}

pub fn oracle(v: [Point; 3], k: usize, sigma: f64, samples: &[Point]) -> OracleOps {
    let layout = DofLayout::new(k, None).unwrap();
    let (m, nl, nloc) = (layout.m(), layout.cell_dim(), layout.local_dim());
    let lib_geom = CellGeometry::from_triangle(v);
    let basis = CellBasis::new(&v, layout.basis_degree()).unwrap();
    let area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).abs();
    let h = (0..3).map(|i| (v[(i + 1) % 3] - v[i]).norm()).fold(0.0, f64::max);
    let c = (1.0 / 3.0) * (v[0] + v[1] + v[2]);

    let facets: Vec<Facet> = (0..3)
        .map(|i| {
            let (start, end) = (lib_geom.facets[i].start, lib_geom.facets[i].end);
            let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            assert!((start == a && end == b) || (start == b && end == a), "facet {i} is not opposite vertex {i}");
            let t = end - start;
            let len = t.norm();
            let mut normal = Point::new(t.y / len, -t.x / len);
            if normal.dot(v[i] - start) > 0.0 {
                normal = -1.0 * normal;
            }
            Facet { start, end, len, normal }
        })
        .collect();
    let fbasis: Vec<FacetBasis> = facets.iter().map(|f| FacetBasis::new(f.start, f.end, k.max(m))).collect();
    let chi = |fi: usize, p: Point| fbasis[fi].eval(fbasis[fi].parameter(p));

    let deg = k + 2;
    let mono = monomials(deg, c, h);
    let n = mono.len();
    let cell_q = triangle_rule(&v, deg + 8);
    let facet_q: Vec<Vec<(Point, f64)>> = facets.iter().map(|f| segment_rule(f.start, f.end, deg + 8)).collect();

    // Hessian equations tested with every monomial, then three constraint rows
    let mut a = Mat::<f64>::zeros(n + 3, n);
    let mut rhs = Mat::<f64>::zeros(n + 3, nloc);
    for (j, mj) in mono.iter().enumerate() {
        for (i, mi) in mono.iter().enumerate() {
            let mut s = 0.0;
            for &(p, w) in &cell_q {
                s += w * (mi.d(2, 0, p) * mj.d(2, 0, p) + 2.0 * mi.d(1, 1, p) * mj.d(1, 1, p) + mi.d(0, 2, p) * mj.d(0, 2, p));
            }
            a[(j, i)] = s;
        }
        // (v_T, Δ²p)_T
        for &(p, w) in &cell_q {
            let bilap = mj.d(4, 0, p) + 2.0 * mj.d(2, 2, p) + mj.d(0, 4, p);
            let phi = basis.eval(p, 0).unwrap();
            for col in 0..nl {
                rhs[(j, col)] += w * phi.jets[col].value() * bilap;
            }
        }
        for (fi, f) in facets.iter().enumerate() {
            let nu = f.normal;
            let t = (1.0 / f.len) * (f.end - f.start);
            for &(p, w) in &facet_q[fi] {
                let x = chi(fi, p);
                let dn_lap = mj.d3(nu, Point::new(1.0, 0.0), Point::new(1.0, 0.0), p) + mj.d3(nu, Point::new(0.0, 1.0), Point::new(0.0, 1.0), p);
                let dttn = mj.d3(t, t, nu, p);
                let dnn = mj.d2(nu, nu, p);
                // −(v_F, ∂_nΔp)_F − (v_F, ∂_tt ∂_n p)_F
                for b in 0..=m {
                    rhs[(j, layout.facet_value_offset(fi) + b)] -= w * x[b] * (dn_lap + dttn);
                }
                // (β_F, ∂_nn p)_F
                for b in 0..=k {
                    rhs[(j, layout.facet_normal_offset(fi) + b)] += w * x[b] * dnn;
                }
            }
            // endpoint terms with the tangent pointing out of the facet
            for (x, other) in [(f.start, f.end), (f.end, f.start)] {
                let e = (1.0 / f.len) * (x - other);
                let vid = (0..3).find(|&q| v[q] == x).unwrap();
                rhs[(j, layout.vertex_offset(vid))] += mj.d2(e, nu, x);
            }
        }
    }
    for (i, mi) in mono.iter().enumerate() {
        for &(p, w) in &cell_q {
            a[(n, i)] += w * mi.value(p);
            a[(n + 1, i)] += w * mi.grad(p).x;
            a[(n + 2, i)] += w * mi.grad(p).y;
        }
    }
    for &(p, w) in &cell_q {
        let phi = basis.eval(p, 0).unwrap();
        for col in 0..nl {
            rhs[(n, col)] += w * phi.jets[col].value();
        }
    }
    for (fi, f) in facets.iter().enumerate() {
        for &(p, w) in &facet_q[fi] {
            let x = chi(fi, p);
            for b in 0..=m {
                rhs[(n + 1, layout.facet_value_offset(fi) + b)] += w * x[b] * f.normal.x;
                rhs[(n + 2, layout.facet_value_offset(fi) + b)] += w * x[b] * f.normal.y;
            }
        }
    }
    let coef = a.qr().solve_lstsq(&rhs);
    let recon = |col: usize, p: Point| (0..n).map(|i| coef[(i, col)] * mono[i].value(p)).sum::<f64>();
    let recon_grad = |col: usize, p: Point| {
        let mut g = Point::new(0.0, 0.0);
        for i in 0..n {
            g = g + coef[(i, col)] * mono[i].grad(p);
        }
        g
    };
    let recon_values = Mat::from_fn(samples.len(), nloc, |s, col| recon(col, samples[s]));

    // cell residual projected onto P_ℓ
    let cell_mono = monomials(layout.ell, c, h);
    let mut g = Mat::<f64>::zeros(cell_mono.len(), cell_mono.len());
    let mut mom = Mat::<f64>::zeros(cell_mono.len(), nloc);
    for &(p, w) in &cell_q {
        let phi = basis.eval(p, 0).unwrap();
        for (i, qi) in cell_mono.iter().enumerate() {
            for (j, qj) in cell_mono.iter().enumerate() {
                g[(i, j)] += w * qi.value(p) * qj.value(p);
            }
            for col in 0..nloc {
                let vt = if col < nl { phi.jets[col].value() } else { 0.0 };
                mom[(i, col)] += w * qi.value(p) * (vt - recon(col, p));
            }
        }
    }
    let cell_form = gram_quadratic_form(&g, &mom);

    // facet residuals projected onto P_m(F) and P_k(F) via powers of the arclength
    let mut value_forms = Vec::new();
    let mut normal_forms = Vec::new();
    for (fi, f) in facets.iter().enumerate() {
        for (degree, offset, normal) in [(m, layout.facet_value_offset(fi), false), (k, layout.facet_normal_offset(fi), true)] {
            let mut g = Mat::<f64>::zeros(degree + 1, degree + 1);
            let mut mom = Mat::<f64>::zeros(degree + 1, nloc);
            for &(p, w) in &facet_q[fi] {
                let s = (p - f.start).norm() / f.len;
                let x = chi(fi, p);
                for i in 0..=degree {
                    for j in 0..=degree {
                        g[(i, j)] += w * s.powi(i as i32) * s.powi(j as i32);
                    }
                    for col in 0..nloc {
                        let unknown = if col >= offset && col <= offset + degree { x[col - offset] } else { 0.0 };
                        let trace = if normal { recon_grad(col, p).dot(f.normal) } else { recon(col, p) };
                        mom[(i, col)] += w * s.powi(i as i32) * (unknown - trace);
                    }
                }
            }
            let form = gram_quadratic_form(&g, &mom);
            if normal {
                normal_forms.push(form);
            } else {
                value_forms.push(form);
            }
        }
    }

    // vertex residuals
    let vertex_res: Vec<Vec<f64>> = (0..3)
        .map(|j| (0..nloc).map(|col| if col == layout.vertex_offset(j) { 1.0 } else { 0.0 } - recon(col, v[j])).collect())
        .collect();

    let mut stab_source = Mat::<f64>::zeros(nloc, nloc);
    let mut stab_eigen = Mat::<f64>::zeros(nloc, nloc);
    let ell_f = |fi: usize| h * h * facets[fi].len / area;
    let ell_ef = |fi: usize| h * h / facets[fi].len;
    for r in 0..nloc {
        for s in 0..nloc {
            stab_source[(r, s)] += h.powi(-4) * cell_form[(r, s)];
            stab_eigen[(r, s)] += sigma * h.powi(-4) * cell_form[(r, s)];
            for fi in 0..3 {
                stab_source[(r, s)] += h.powi(-3) * value_forms[fi][(r, s)] + h.powi(-1) * normal_forms[fi][(r, s)];
                stab_eigen[(r, s)] += sigma / (h * h * ell_f(fi)) * value_forms[fi][(r, s)] + sigma / ell_f(fi) * normal_forms[fi][(r, s)];
            }
            for (j, res) in vertex_res.iter().enumerate() {
                let rr = res[r] * res[s];
                stab_source[(r, s)] += h.powi(-2) * rr;
                // both facets of the cell that contain vertex j
                for fi in (0..3).filter(|&fi| fi != j) {
                    stab_eigen[(r, s)] += sigma / (ell_f(fi) * ell_ef(fi)) * rr;
                }
            }
        }
    }
    OracleOps {
        recon_values,
        stab_source,
        stab_eigen,
    }
}
