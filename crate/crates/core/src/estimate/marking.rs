use crate::error::{HhoError, Result};

/// Smallest set `M` with `Σ_M η(T)² ≥ θ Σ η(T)²`.
///
/// `squared` holds `η(T)²`. Cells are taken by decreasing indicator, ties by
/// increasing id; the result is sorted by id.
pub fn dorfler_mark(squared: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(HhoError::InvalidParameter {
            name: "theta",
            reason: format!("must lie in (0, 1], got {theta}"),
        });
    }
    if let Some(bad) = squared.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(HhoError::InvalidParameter {
            name: "indicators",
            reason: format!("indicator of cell {bad} is {}", squared[bad]),
        });
    }
    let mut order: Vec<usize> = (0..squared.len()).collect();
    order.sort_by(|&a, &b| squared[b].total_cmp(&squared[a]).then(a.cmp(&b)));
    // total in the same order so that θ = 1 is reached exactly
    let total: f64 = order.iter().map(|&c| squared[c]).sum();
    let goal = theta * total;
    let mut marked = Vec::new();
    let mut sum = 0.0;
    for &c in &order {
        if sum >= goal {
            break;
        }
        sum += squared[c];
        marked.push(c);
    }
    marked.sort_unstable();
    Ok(marked)
}
