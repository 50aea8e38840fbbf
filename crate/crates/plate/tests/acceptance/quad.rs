#![allow(dead_code)]

use hho_core::mesh::Point;

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Collapsed tensor rule on a triangle, exact for degree `2n - 2`.
pub fn triangle_rule(v: &[Point; 3], n: usize) -> Vec<(Point, f64)> {
    let g = gauss_legendre(n);
    let area2 = ((v[1] - v[0]).cross(v[2] - v[0])).abs();
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            let (a, b) = (s, (1.0 - s) * t);
            let p = v[0] + a * (v[1] - v[0]) + b * (v[2] - v[0]);
            out.push((p, ws * wt * (1.0 - s) * area2));
        }
    }
    out
}

/// Rule on the segment from `a` to `b`.
pub fn segment_rule(a: Point, b: Point, n: usize) -> Vec<(Point, f64)> {
    let len = (b - a).norm();
    gauss_legendre(n).into_iter().map(|(s, w)| (a + s * (b - a), w * len)).collect()
}

