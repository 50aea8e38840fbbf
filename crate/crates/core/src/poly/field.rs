use crate::mesh::Point;
use crate::poly::basis::Jet;

/// A function with values, gradient and Hessian.
pub trait ScalarField {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> Point;
    /// `[∂xx, ∂xy, ∂yy]`.
    fn hessian(&self, p: Point) -> [f64; 3];
}

/// Polynomial `Σ c x^a y^b` in global coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(usize, usize, f64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(usize, usize, f64)>) -> Self {
        Self { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().filter(|t| t.2 != 0.0).map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    /// All partial derivatives up to order 4 at `p`.
    pub fn jet(&self, p: Point) -> Jet {
        let falling = |a: usize, k: usize| -> f64 {
            if k > a {
                0.0
            } else {
                ((a + 1 - k)..=a).map(|v| v as f64).product()
            }
        };
        Jet::from_partials(|px, py| {
            self.terms
                .iter()
                .filter(|&&(a, b, _)| px <= a && py <= b)
                .map(|&(a, b, c)| c * falling(a, px) * falling(b, py) * p.x.powi((a - px) as i32) * p.y.powi((b - py) as i32))
                .sum()
        })
    }
}

impl ScalarField for Polynomial {
    fn value(&self, p: Point) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * p.x.powi(a as i32) * p.y.powi(b as i32)).sum()
    }

    fn gradient(&self, p: Point) -> Point {
        self.jet(p).gradient()
    }

    fn hessian(&self, p: Point) -> [f64; 3] {
        let j = self.jet(p);
        [j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)]
    }
}
