//! Orthonormal polynomial bases on triangles and segments.
//!
//! Cell bases are obtained from scaled monomials
//! `((x - x_T)/h_T)^a ((y - y_T)/h_T)^b`, ordered by total degree, by modified
//! Gram-Schmidt in the `L²(T)` inner product. The ordering makes the first
//! `dim P_d` functions of a degree-`D` basis an orthonormal basis of `P_d(T)`
//! for every `d ≤ D`.

use crate::error::{HhoError, Result};
use crate::mesh::Point;
use crate::poly::quadrature::{cell_rule, legendre_with_derivative};

/// Highest derivative order carried by [`Jet`].
pub const MAX_ORDER: usize = 4;
const NUM_PARTIALS: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

/// `dim P_d` in two variables.
pub const fn dim_p2(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Exponents `(a, b)` ordered by total degree, then by increasing `b`.
pub fn monomial_exponents(d: usize) -> Vec<(usize, usize)> {
    (0..=d).flat_map(|n| (0..=n).map(move |j| (n - j, j))).collect()
}

const fn partial_index(px: usize, py: usize) -> usize {
    let s = px + py;
    s * (s + 1) / 2 + py
}

/// All partial derivatives of a scalar function up to order 4 at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    d: [f64; NUM_PARTIALS],
}

impl Default for Jet {
    fn default() -> Self {
        Self { d: [0.0; NUM_PARTIALS] }
    }
}

impl Jet {
    /// `∂x^px ∂y^py`.
    pub fn partial(&self, px: usize, py: usize) -> f64 {
        self.d[partial_index(px, py)]
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn gradient(&self) -> Point {
        Point::new(self.partial(1, 0), self.partial(0, 1))
    }

    /// `∂_a ∂_b` for directions `a`, `b`.
    pub fn second(&self, a: Point, b: Point) -> f64 {
        self.partial(2, 0) * a.x * b.x
            + self.partial(1, 1) * (a.x * b.y + a.y * b.x)
            + self.partial(0, 2) * a.y * b.y
    }

    /// `∂_a ∂_b ∂_c`.
    pub fn third(&self, a: Point, b: Point, c: Point) -> f64 {
        let (ax, ay, bx, by, cx, cy) = (a.x, a.y, b.x, b.y, c.x, c.y);
        self.partial(3, 0) * ax * bx * cx
            + self.partial(2, 1) * (ax * bx * cy + ax * by * cx + ay * bx * cx)
            + self.partial(1, 2) * (ax * by * cy + ay * bx * cy + ay * by * cx)
            + self.partial(0, 3) * ay * by * cy
    }

    pub fn directional(&self, n: Point) -> f64 {
        self.gradient().dot(n)
    }

    pub fn laplacian(&self) -> f64 {
        self.partial(2, 0) + self.partial(0, 2)
    }

    /// `∂_n Δ`.
    pub fn normal_laplacian(&self, n: Point) -> f64 {
        n.x * (self.partial(3, 0) + self.partial(1, 2)) + n.y * (self.partial(2, 1) + self.partial(0, 3))
    }

    pub fn bilaplacian(&self) -> f64 {
        self.partial(4, 0) + 2.0 * self.partial(2, 2) + self.partial(0, 4)
    }

    /// Frobenius product of the two Hessians.
    pub fn hessian_inner(&self, other: &Jet) -> f64 {
        self.partial(2, 0) * other.partial(2, 0)
            + 2.0 * self.partial(1, 1) * other.partial(1, 1)
            + self.partial(0, 2) * other.partial(0, 2)
    }

    pub fn axpy(&mut self, alpha: f64, other: &Jet) {
        for (a, b) in self.d.iter_mut().zip(other.d.iter()) {
            *a += alpha * b;
        }
    }

    pub fn from_partials(f: impl Fn(usize, usize) -> f64) -> Jet {
        let mut jet = Jet::default();
        for s in 0..=MAX_ORDER {
            for py in 0..=s {
                jet.d[partial_index(s - py, py)] = f(s - py, py);
            }
        }
        jet
    }
}

/// Values and derivatives of every basis function at one point.
#[derive(Clone, Debug)]
pub struct DerivTable {
    pub order: usize,
    pub jets: Vec<Jet>,
}

#[derive(Clone, Debug)]
pub struct CellBasis {
    pub center: Point,
    pub h: f64,
    pub degree: usize,
    exponents: Vec<(usize, usize)>,
    /// Row `i` holds the monomial coefficients of basis function `i`
    /// (lower triangular).
    coeffs: Vec<f64>,
}

impl CellBasis {
    /// Orthonormal basis of `P_degree(T)` for the triangle `v`, scaled by the
    /// diameter of `v`.
    pub fn new(v: &[Point; 3], degree: usize) -> Result<CellBasis> {
        let h = [(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()]
            .into_iter()
            .fold(0.0, f64::max);
        let center = (1.0 / 3.0) * (v[0] + v[1] + v[2]);
        let exponents = monomial_exponents(degree);
        let n = exponents.len();
        let rule = cell_rule(2 * degree)?;
        let quad: Vec<(Point, f64)> = rule.map(v).collect();

        // monomial values at the quadrature points
        let mono: Vec<Vec<f64>> = quad
            .iter()
            .map(|(p, _)| {
                let (xi, eta) = ((p.x - center.x) / h, (p.y - center.y) / h);
                exponents.iter().map(|&(a, b)| xi.powi(a as i32) * eta.powi(b as i32)).collect()
            })
            .collect();
        let weights: Vec<f64> = quad.iter().map(|q| q.1).collect();

        let mut coeffs = vec![0.0; n * n];
        // values of the current orthonormal functions at quadrature points
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            let mut val: Vec<f64> = mono.iter().map(|m| m[i]).collect();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for j in 0..i {
                    let proj: f64 = val.iter().zip(&values[j]).zip(&weights).map(|((a, b), w)| w * a * b).sum();
                    for (a, b) in val.iter_mut().zip(&values[j]) {
                        *a -= proj * b;
                    }
                    for k in 0..=j {
                        c[k] -= proj * coeffs[j * n + k];
                    }
                }
            }
            let norm: f64 = val.iter().zip(&weights).map(|(a, w)| w * a * a).sum::<f64>().sqrt();
            for a in val.iter_mut() {
                *a /= norm;
            }
            for k in 0..=i {
                coeffs[i * n + k] = c[k] / norm;
            }
            values.push(val);
        }
        Ok(CellBasis {
            center,
            h,
            degree,
            exponents,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Monomial values and derivatives (up to `order`) at `p`.
    fn monomial_jets(&self, p: Point, order: usize) -> Vec<Jet> {
        let xi = (p.x - self.center.x) / self.h;
        let eta = (p.y - self.center.y) / self.h;
        let d = self.degree;
        let mut pow_x = vec![1.0; d + 1];
        let mut pow_y = vec![1.0; d + 1];
        for i in 1..=d {
            pow_x[i] = pow_x[i - 1] * xi;
            pow_y[i] = pow_y[i - 1] * eta;
        }
        // falling factorials a!/(a-p)!
        let falling = |a: usize, p: usize| -> f64 { ((a + 1 - p)..=a).map(|v| v as f64).product() };
        let inv_h: Vec<f64> = (0..=MAX_ORDER).map(|s| self.h.powi(-(s as i32))).collect();
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let mut jet = Jet::default();
                for s in 0..=order {
                    for py in 0..=s {
                        let px = s - py;
                        if px <= a && py <= b {
                            jet.d[partial_index(px, py)] =
                                falling(a, px) * falling(b, py) * pow_x[a - px] * pow_y[b - py] * inv_h[s];
                        }
                    }
                }
                jet
            })
            .collect()
    }

    /// Values and derivatives up to `order` of every basis function at `p`.
    pub fn eval(&self, p: Point, order: usize) -> Result<DerivTable> {
        if order > MAX_ORDER {
            return Err(HhoError::UnsupportedDerivativeOrder { order });
        }
        let mono = self.monomial_jets(p, order);
        let n = self.dim();
        let jets = (0..n)
            .map(|i| {
                let mut jet = Jet::default();
                for k in 0..=i {
                    let c = self.coeffs[i * n + k];
                    if c != 0.0 {
                        jet.axpy(c, &mono[k]);
                    }
                }
                jet
            })
            .collect();
        Ok(DerivTable { order, jets })
    }

    /// Jet of `Σ_i coeffs[i] φ_i` at `p`; missing coefficients count as zero.
    pub fn eval_combination(&self, coeffs: &[f64], p: Point, order: usize) -> Result<Jet> {
        let table = self.eval(p, order)?;
        let mut jet = Jet::default();
        for (c, j) in coeffs.iter().zip(&table.jets) {
            jet.axpy(*c, j);
        }
        Ok(jet)
    }
}

/// `L²(F)`-orthonormal Legendre basis on a segment, in the parameter
/// `s ∈ [0, 1]` running from `start` to `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacetBasis {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    pub degree: usize,
}

impl FacetBasis {
    pub fn new(start: Point, end: Point, degree: usize) -> FacetBasis {
        FacetBasis {
            start,
            end,
            length: (end - start).norm(),
            degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Parameter of the orthogonal projection of `p` onto the segment line.
    pub fn parameter(&self, p: Point) -> f64 {
        let d = self.end - self.start;
        (p - self.start).dot(d) / d.dot(d)
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let x = 2.0 * s - 1.0;
        (0..=self.degree)
            .map(|j| ((2 * j + 1) as f64 / self.length).sqrt() * legendre_with_derivative(j, x).0)
            .collect()
    }
}
