use std::f64::consts::PI;

/// `c_tr = (2 + 3/π)/π` in two dimensions.
pub fn trace_constant() -> f64 {
    (2.0 + 3.0 / PI) / PI
}

/// Constant of the eigen stabilization bound, `α / σ`.
pub fn stabilization_constant() -> f64 {
    let c = trace_constant();
    1.0 / PI.powi(4) + c / (PI * PI) + c + c * (2.0 / PI + 2.0 / (PI * PI))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LowerBound {
    /// `α + β λ_h ≤ 1`, i.e. the discrete eigenvalue itself is a lower bound.
    pub fn is_direct(&self, lambda_h: f64) -> bool {
        self.alpha + self.beta * lambda_h <= 1.0
    }
}

/// `min{1, 1/(α + β λ_h)} λ_h` with `α = σ · stabilization_constant()` and
/// `β = h_max⁴/π⁴`.
pub fn leb(lambda_h: f64, sigma: f64, h_max: f64) -> LowerBound {
    let alpha = sigma * stabilization_constant();
    let beta = h_max.powi(4) / PI.powi(4);
    leb_with(lambda_h, alpha, beta)
}

pub fn leb_with(lambda_h: f64, alpha: f64, beta: f64) -> LowerBound {
    let value = (1.0f64).min(1.0 / (alpha + beta * lambda_h)) * lambda_h;
    LowerBound { value, alpha, beta }
}
