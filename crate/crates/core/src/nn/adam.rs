use serde::{Deserialize, Serialize};

use super::ParamVector;

/// Adam with bias correction. Holds the moment estimates; parameters are
/// passed in and a new vector is returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &ParamVector, grad: &ParamVector) -> ParamVector {
        assert_eq!(params.len(), grad.len(), "gradient shape mismatch");
        assert_eq!(params.len(), self.m.len(), "optimizer shape mismatch");
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut out = params.0.clone();
        for (k, (o, &g)) in out.iter_mut().zip(&grad.0).enumerate() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            *o -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        ParamVector(out)
    }
}

/// Rescales `grad` in place so its Euclidean norm is at most `max_norm`.
pub fn clip_grad_norm(grad: &mut ParamVector, max_norm: f64) {
    let n = grad.norm();
    if n > max_norm && n > 0.0 {
        let k = max_norm / n;
        grad.0.iter_mut().for_each(|g| *g *= k);
    }
}
