use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output head of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadKind {
    /// Diagonal Gaussian over actions: `bound * tanh(z)` mean plus a
    /// learnable, state-independent log standard deviation per dimension.
    Gaussian,
    /// Unsquashed scalar value.
    Value,
    /// Softmax over the outputs.
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    pub head: HeadKind,
    /// Mean bound of the Gaussian head; unused by other heads.
    pub action_bound: f64,
    /// Fixed factor applied to every input before the first layer.
    #[serde(default = "unit_scale")]
    pub input_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl MlpSpec {
    pub fn new(input: usize, hidden: &[usize], output: usize, head: HeadKind) -> Self {
        MlpSpec {
            input,
            hidden: hidden.to_vec(),
            output,
            head,
            action_bound: 1.0,
            input_scale: 1.0,
        }
    }

    pub fn with_input_scale(mut self, scale: f64) -> Self {
        self.input_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.output == 0 || self.hidden.contains(&0) {
            return Err(Error::config("network widths must be at least 1"));
        }
        if self.head == HeadKind::Value && self.output != 1 {
            return Err(Error::config("value head has exactly one output"));
        }
        if !(self.input_scale > 0.0 && self.input_scale.is_finite()) {
            return Err(Error::config("input scale must be positive and finite"));
        }
        if self.head == HeadKind::Gaussian && !(self.action_bound > 0.0) {
            return Err(Error::config("action bound must be positive"));
        }
        Ok(())
    }

    fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input);
        w.extend_from_slice(&self.hidden);
        w.push(self.output);
        w
    }

    /// `(in, out)` per dense layer.
    fn layers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.widths();
        (0..w.len() - 1).map(move |k| (w[k], w[k + 1]))
    }

    fn dense_count(&self) -> usize {
        self.layers().map(|(i, o)| i * o + o).sum()
    }

    pub fn param_count(&self) -> usize {
        self.dense_count()
            + match self.head {
                HeadKind::Gaussian => self.output,
                _ => 0,
            }
    }

    /// Glorot-uniform hidden layers; the final layer is scaled down so fresh
    /// policies start near-neutral.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R, init_log_std: f64) -> ParamVector {
        let mut p = Vec::with_capacity(self.param_count());
        let n_layers = self.hidden.len() + 1;
        for (k, (fan_in, fan_out)) in self.layers().enumerate() {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let scale = if k + 1 == n_layers { 0.1 } else { 1.0 };
            for _ in 0..fan_in * fan_out {
                p.push(scale * rng.random_range(-limit..limit));
            }
            p.extend(std::iter::repeat_n(0.0, fan_out));
        }
        if self.head == HeadKind::Gaussian {
            p.extend(std::iter::repeat_n(init_log_std, self.output));
        }
        ParamVector(p)
    }

    pub fn zeros(&self) -> ParamVector {
        ParamVector(vec![0.0; self.param_count()])
    }
}

/// Flat trainable parameters: per dense layer a row-major weight matrix
/// followed by its bias, then the Gaussian log-std if present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Intermediate values from one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    /// Scaled input followed by each hidden layer's post-activation.
    activations: Vec<Vec<f64>>,
    /// Final-layer pre-activation.
    logits: Vec<f64>,
    /// Head output (mean, value or probabilities).
    pub output: Vec<f64>,
}

fn check_input(spec: &MlpSpec, params: &ParamVector, input: &[f64]) -> Result<()> {
    if input.len() != spec.input {
        return Err(Error::input(format!(
            "network expects {} inputs, got {}",
            spec.input,
            input.len()
        )));
    }
    if params.len() != spec.param_count() {
        return Err(Error::input(format!(
            "network expects {} parameters, got {}",
            spec.param_count(),
            params.len()
        )));
    }
    Ok(())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn forward_tape(spec: &MlpSpec, params: &ParamVector, input: &[f64]) -> Result<Tape> {
    check_input(spec, params, input)?;
    let p = params.as_slice();
    let n_layers = spec.hidden.len() + 1;
    let mut activations = Vec::with_capacity(n_layers);
    activations.push(input.iter().map(|x| x * spec.input_scale).collect());
    let mut offset = 0;
    let mut logits = Vec::new();
    for (k, (fan_in, fan_out)) in spec.layers().enumerate() {
        let w = &p[offset..offset + fan_in * fan_out];
        let b = &p[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        let x = activations.last().expect("input pushed");
        let z: Vec<f64> = (0..fan_out)
            .map(|o| {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        if k + 1 == n_layers {
            logits = z;
        } else {
            activations.push(z.into_iter().map(f64::tanh).collect());
        }
    }
    let output = match spec.head {
        HeadKind::Gaussian => logits.iter().map(|z| spec.action_bound * z.tanh()).collect(),
        HeadKind::Value => logits.clone(),
        HeadKind::Simplex => softmax(&logits),
    };
    Ok(Tape {
        activations,
        logits,
        output,
    })
}

pub fn forward(spec: &MlpSpec, params: &ParamVector, input: &[f64]) -> Result<Vec<f64>> {
    Ok(forward_tape(spec, params, input)?.output)
}

/// The Gaussian head's log standard deviation; empty for other heads.
pub fn log_std<'a>(spec: &MlpSpec, params: &'a ParamVector) -> &'a [f64] {
    match spec.head {
        HeadKind::Gaussian => &params.as_slice()[spec.dense_count()..],
        _ => &[],
    }
}

/// Accumulates into `grad` the parameter gradient given the loss gradient
/// with respect to the head output (and, for the Gaussian head, the
/// log-std).
pub fn backward(
    spec: &MlpSpec,
    params: &ParamVector,
    tape: &Tape,
    d_output: &[f64],
    d_log_std: &[f64],
    grad: &mut [f64],
) {
    let p = params.as_slice();
    let mut delta: Vec<f64> = match spec.head {
        HeadKind::Gaussian => tape
            .logits
            .iter()
            .zip(d_output)
            .map(|(z, g)| {
                let t = z.tanh();
                g * spec.action_bound * (1.0 - t * t)
            })
            .collect(),
        HeadKind::Value => d_output.to_vec(),
        HeadKind::Simplex => {
            let y = &tape.output;
            let dot: f64 = y.iter().zip(d_output).map(|(a, b)| a * b).sum();
            y.iter().zip(d_output).map(|(yi, gi)| yi * (gi - dot)).collect()
        }
    };
    if spec.head == HeadKind::Gaussian {
        let at = spec.dense_count();
        for (g, d) in grad[at..].iter_mut().zip(d_log_std) {
            *g += d;
        }
    }
    let layers: Vec<(usize, usize)> = spec.layers().collect();
    let mut offsets = Vec::with_capacity(layers.len());
    let mut off = 0;
    for &(i, o) in &layers {
        offsets.push(off);
        off += i * o + o;
    }
    for k in (0..layers.len()).rev() {
        let (fan_in, fan_out) = layers[k];
        let off = offsets[k];
        let x = &tape.activations[k];
        for o in 0..fan_out {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
            for (g, xi) in row.iter_mut().zip(x) {
                *g += d * xi;
            }
            grad[off + fan_in * fan_out + o] += d;
        }
        if k == 0 {
            break;
        }
        let w = &p[off..off + fan_in * fan_out];
        let mut prev = vec![0.0; fan_in];
        for o in 0..fan_out {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            for (pv, wv) in prev.iter_mut().zip(&w[o * fan_in..(o + 1) * fan_in]) {
                *pv += d * wv;
            }
        }
        // tanh'(z) = 1 - a^2 with a the stored activation.
        for (pv, a) in prev.iter_mut().zip(x) {
            *pv *= 1.0 - a * a;
        }
        delta = prev;
    }
}

/// Loss contribution of one sample and its gradient with respect to the
/// head output and log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLoss {
    pub loss: f64,
    pub d_output: Vec<f64>,
    pub d_log_std: Vec<f64>,
}

/// Exact gradient of `Σ_k loss(k, output_k, log_std)` over `inputs`.
///
/// The closure receives the sample index, the head output and the log-std
/// slice (empty unless Gaussian) and returns the sample's loss together with
/// its partial derivatives.
pub fn gradient<I, F>(
    spec: &MlpSpec,
    params: &ParamVector,
    inputs: I,
    mut loss: F,
) -> Result<(f64, ParamVector)>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
    F: FnMut(usize, &[f64], &[f64]) -> SampleLoss,
{
    let mut grad = vec![0.0; spec.param_count()];
    let mut total = 0.0;
    let ls = log_std(spec, params).to_vec();
    for (k, input) in inputs.into_iter().enumerate() {
        let tape = forward_tape(spec, params, input.as_ref())?;
        let s = loss(k, &tape.output, &ls);
        total += s.loss;
        backward(spec, params, &tape, &s.d_output, &s.d_log_std, &mut grad);
    }
    if !total.is_finite() {
        return Err(Error::Numeric(format!("loss evaluated to {total}")));
    }
    Ok((total, ParamVector(grad)))
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-density of `action` under a diagonal Gaussian.
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

/// `(d logp / d mean, d logp / d log_std)` for a diagonal Gaussian.
pub fn gaussian_log_prob_grad(mean: &[f64], log_std: &[f64], action: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut dm = Vec::with_capacity(mean.len());
    let mut ds = Vec::with_capacity(mean.len());
    for ((m, ls), a) in mean.iter().zip(log_std).zip(action) {
        let var = (2.0 * ls).exp();
        let diff = a - m;
        dm.push(diff / var);
        ds.push(diff * diff / var - 1.0);
    }
    (dm, ds)
}

pub fn sample_gaussian<R: Rng + ?Sized>(mean: &[f64], log_std: &[f64], rng: &mut R) -> Vec<f64> {
    mean.iter()
        .zip(log_std)
        .map(|(m, ls)| {
            let n: f64 = StandardNormal.sample(rng);
            m + ls.exp() * n
        })
        .collect()
}
