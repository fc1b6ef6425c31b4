//! Small multilayer perceptrons with hand-written reverse-mode gradients
//! and an Adam optimizer.

mod adam;
pub mod checkpoint;
mod mlp;

pub use adam::{clip_grad_norm, Adam};
pub use checkpoint::Checkpoint;
pub use mlp::{
    backward, forward, forward_tape, gaussian_log_prob, gaussian_log_prob_grad, gradient,
    log_std, sample_gaussian, HeadKind, MlpSpec, ParamVector, SampleLoss, Tape,
};

use rand::Rng;

use crate::error::{Error, Result};

/// A spec paired with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: MlpSpec,
    pub params: ParamVector,
}

impl Network {
    pub fn new(spec: MlpSpec, params: ParamVector) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.param_count() {
            return Err(Error::input(format!(
                "{} parameters for a spec expecting {}",
                params.len(),
                spec.param_count()
            )));
        }
        if !params.is_finite() {
            return Err(Error::Numeric("non-finite parameters".into()));
        }
        Ok(Network { spec, params })
    }

    pub fn init<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R, init_log_std: f64) -> Result<Self> {
        spec.validate()?;
        let params = spec.init(rng, init_log_std);
        Ok(Network { spec, params })
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        forward(&self.spec, &self.params, input)
    }

    pub fn log_std(&self) -> &[f64] {
        log_std(&self.spec, &self.params)
    }

    /// Scalar output of a value network.
    pub fn value(&self, input: &[f64]) -> Result<f64> {
        Ok(self.forward(input)?[0])
    }

    /// Draws an action from a Gaussian policy; returns `(action, log
    /// density)`.
    pub fn sample_action<R: Rng + ?Sized>(&self, input: &[f64], rng: &mut R) -> Result<(Vec<f64>, f64)> {
        let mean = self.forward(input)?;
        let ls = self.log_std();
        let a = sample_gaussian(&mean, ls, rng);
        let lp = gaussian_log_prob(&mean, ls, &a);
        Ok((a, lp))
    }

    pub fn log_prob(&self, input: &[f64], action: &[f64]) -> Result<f64> {
        let mean = self.forward(input)?;
        Ok(gaussian_log_prob(&mean, self.log_std(), action))
    }
}
