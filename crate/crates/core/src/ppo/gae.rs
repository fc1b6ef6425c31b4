use crate::error::{Error, Result};

/// Generalized advantage estimates for one trajectory of `T` rewards.
/// `values` holds `V(s_0) … V(s_T)`, the last entry bootstrapping the
/// truncated tail.
///
/// Computed by the backward recursion `Â(t) = δ(t) + γλ Â(t+1)` with
/// `δ(t) = R(t) + γ V(s_{t+1}) − V(s_t)`.
pub fn gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Result<Vec<f64>> {
    if values.len() != rewards.len() + 1 {
        return Err(Error::input(format!(
            "gae needs {} values for {} rewards, got {}",
            rewards.len() + 1,
            rewards.len(),
            values.len()
        )));
    }
    let mut adv = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * values[t + 1] - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    Ok(adv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_zero_is_td_residual() {
        let r = [1.0, -2.0, 0.5];
        let v = [0.3, 0.1, -0.4, 0.9];
        let a = gae(&r, &v, 0.8, 0.0).unwrap();
        for t in 0..3 {
            assert!((a[t] - (r[t] + 0.8 * v[t + 1] - v[t])).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_zero_is_reward_minus_value() {
        let r = [1.0, -2.0, 0.5];
        let v = [0.3, 0.1, -0.4, 0.9];
        let a = gae(&r, &v, 0.0, 0.95).unwrap();
        for t in 0..3 {
            assert_eq!(a[t], r[t] - v[t]);
        }
    }

    #[test]
    fn two_step_example() {
        let a = gae(&[1.0, 1.0], &[0.0, 0.0, 0.0], 0.8, 1.0).unwrap();
        assert!((a[0] - 1.8).abs() < 1e-15 && (a[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(gae(&[1.0, 1.0], &[0.0, 0.0], 0.8, 1.0).is_err());
    }
}
