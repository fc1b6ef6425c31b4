/// Clipped surrogate `min(μÂ, clip(μ, 1−ε, 1+ε)Â)`, to be maximized.
pub fn clipped_policy_objective(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    (ratio * advantage).min(clipped * advantage)
}

/// Derivative of [`clipped_policy_objective`] with respect to the new
/// log-density (`dμ/dlogπ = μ`). Zero where the clipped branch is active
/// and flat.
pub fn clipped_objective_dlogp(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    let unclipped_active = ratio * advantage <= clipped * advantage;
    let inside = ratio >= 1.0 - clip && ratio <= 1.0 + clip;
    if unclipped_active || inside {
        advantage * ratio
    } else {
        0.0
    }
}

/// Squared error of the critic against the target `Â + V_old`.
pub fn value_loss(value: f64, advantage: f64, old_value: f64) -> f64 {
    let e = value - (advantage + old_value);
    e * e
}

pub fn value_loss_dvalue(value: f64, advantage: f64, old_value: f64) -> f64 {
    2.0 * (value - (advantage + old_value))
}
