//! Gauss-Legendre rules on the unit segment and collapsed (Duffy) product
//! rules on the reference triangle `(0,0), (1,0), (0,1)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{HhoError, Result};
use crate::mesh::Point;

/// Highest polynomial degree for which rules are tabulated.
pub const MAX_DEGREE: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRule {
    /// Parameters in `[0, 1]`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRule {
    /// Reference coordinates; the weights sum to 1/2.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl SegmentRule {
    /// Physical points and weights on the segment `a`–`b`, with the segment
    /// parameter of each point.
    pub fn map(&self, a: Point, b: Point) -> impl Iterator<Item = (f64, Point, f64)> + '_ {
        let len = (b - a).norm();
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&s, &w)| (s, a + s * (b - a), w * len))
    }
}

impl TriangleRule {
    /// Physical points and weights on the triangle `v`.
    pub fn map(&self, v: &[Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        let e1 = v[1] - v[0];
        let e2 = v[2] - v[0];
        let jac = e1.cross(e2).abs();
        let origin = v[0];
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(p, &w)| (origin + p[0] * e1 + p[1] * e2, w * jac))
    }
}

/// Gauss-Legendre rule exact for polynomials of the given degree on `[0, 1]`.
pub fn facet_rule(degree: usize) -> Result<&'static SegmentRule> {
    static CACHE: [OnceLock<SegmentRule>; MAX_DEGREE + 1] = [const { OnceLock::new() }; MAX_DEGREE + 1];
    check_degree(degree)?;
    Ok(CACHE[degree].get_or_init(|| {
        let (points, weights) = gauss_legendre(degree / 2 + 1);
        SegmentRule { points, weights, degree }
    }))
}

/// Collapsed Gauss rule exact for polynomials of the given total degree on
/// any triangle (after affine mapping).
pub fn cell_rule(degree: usize) -> Result<&'static TriangleRule> {
    static CACHE: [OnceLock<TriangleRule>; MAX_DEGREE + 1] = [const { OnceLock::new() }; MAX_DEGREE + 1];
    check_degree(degree)?;
    Ok(CACHE[degree].get_or_init(|| {
        // x = u, y = v (1 - u); the Jacobian (1 - u) raises the degree in u by one
        let (us, wus) = gauss_legendre((degree + 1) / 2 + 1);
        let (vs, wvs) = gauss_legendre(degree / 2 + 1);
        let mut points = Vec::with_capacity(us.len() * vs.len());
        let mut weights = Vec::with_capacity(us.len() * vs.len());
        for (&u, &wu) in us.iter().zip(&wus) {
            for (&v, &wv) in vs.iter().zip(&wvs) {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights, degree }
    }))
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        Err(HhoError::QuadratureDegree {
            requested: degree,
            max: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

/// `n`-point Gauss-Legendre nodes and weights mapped to `[0, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root; store ascending on [0, 1]
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
