//! Conversions between the unscaled objective used here,
//! `‖y − Xβ‖² + λ₂‖β‖² + λ₁‖β‖₁`, and the glmnet parameterization
//! `(1/2n)‖y − Xβ‖² + λ[(1 − α)/2 ‖β‖² + α‖β‖₁]`.

/// `(λ, α)` in glmnet terms → `(λ₁, λ₂)`.
pub fn from_glmnet(lambda: f64, alpha: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    (2.0 * n * lambda * alpha, n * lambda * (1.0 - alpha))
}

/// `(λ₁, λ₂)` → glmnet `(λ, α)`. Both zero maps to `(0, 1)`.
pub fn to_glmnet(lambda1: f64, lambda2: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let l1 = lambda1 / (2.0 * n);
    let l2 = lambda2 / n;
    let lambda = l1 + l2;
    if lambda == 0.0 {
        (0.0, 1.0)
    } else {
        (lambda, l1 / lambda)
    }
}
