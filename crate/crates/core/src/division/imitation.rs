use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ConfidenceVector;
use crate::comm::InvocationSchedule;
use crate::episode::{run_episode, ActionMode, DivisionMode, EpisodeSpec};
use crate::error::{Error, Result};
use crate::nn::{gradient, Adam, MlpSpec, Network, SampleLoss};
use crate::rewards::RewardParams;
use crate::env::WorldConfig;
use crate::seed;

/// Local observations paired with the central rule's one-hot labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImitationDataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<ConfidenceVector>,
}

impl ImitationDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn push(&mut self, input: Vec<f64>, label: ConfidenceVector) {
        self.inputs.push(input);
        self.labels.push(label);
    }
}

/// Drives `episodes` episodes under the central rule with `low_level`
/// acting, recording `(o_i(t), z_i(t))` for every agent and step.
pub fn il_collect(
    world: &WorldConfig,
    rewards: &RewardParams,
    low_level: &Network,
    episodes: usize,
    master_seed: u64,
) -> Result<ImitationDataset> {
    let mut data = ImitationDataset::default();
    for e in 0..episodes {
        let ep = run_episode(&EpisodeSpec {
            world,
            rewards,
            division: DivisionMode::Central,
            policy: low_level,
            actions: ActionMode::Sample,
            schedule: InvocationSchedule::EveryStep,
            seed: seed::derive(master_seed, "il-collect", e as u64),
        })?;
        for s in ep.steps {
            for (o, &c) in s.observations.into_iter().zip(&s.central_labels) {
                data.push(o, ConfidenceVector::label(c, world.n_patterns()));
            }
        }
    }
    Ok(data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlConfig {
    pub hidden: Vec<usize>,
    /// Factor applied to the observation before the first layer.
    pub input_scale: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Fraction of pairs held out for the accuracy report.
    pub holdout: f64,
    pub seed: u64,
}

impl Default for IlConfig {
    fn default() -> Self {
        IlConfig {
            hidden: vec![64, 64],
            input_scale: 0.25,
            epochs: 60,
            batch_size: 128,
            learning_rate: 3e-3,
            holdout: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlOutcome {
    pub network: Network,
    pub initial_loss: f64,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
    pub heldout_accuracy: f64,
    pub heldout_size: usize,
}

/// Sum over outputs of the squared confidence error.
fn confidence_loss(output: &[f64], label: &[f64]) -> SampleLoss {
    let mut loss = 0.0;
    let mut d = Vec::with_capacity(output.len());
    for (y, z) in output.iter().zip(label) {
        loss += (y - z) * (y - z);
        d.push(2.0 * (y - z));
    }
    SampleLoss {
        loss,
        d_output: d,
        d_log_std: Vec::new(),
    }
}

/// Mean confidence error of `net` over the selected pairs.
pub fn il_loss(net: &Network, data: &ImitationDataset, idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &k in idx {
        let y = net.forward(&data.inputs[k])?;
        total += confidence_loss(&y, &data.labels[k].0).loss;
    }
    Ok(total / idx.len() as f64)
}

/// Gradient of [`il_loss`] with respect to the parameters.
pub fn il_loss_gradient(net: &Network, data: &ImitationDataset, idx: &[usize]) -> Result<(f64, crate::nn::ParamVector)> {
    let scale = 1.0 / idx.len().max(1) as f64;
    let (l, g) = gradient(&net.spec, &net.params, idx.iter().map(|&k| &data.inputs[k]), |j, y, _| {
        let mut s = confidence_loss(y, &data.labels[idx[j]].0);
        s.loss *= scale;
        s.d_output.iter_mut().for_each(|v| *v *= scale);
        s
    })?;
    Ok((l, g))
}

pub fn argmax_accuracy(net: &Network, data: &ImitationDataset, idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0;
    for &k in idx {
        let z = infer_confidence(net, &data.inputs[k])?;
        if z.argmax() == data.labels[k].argmax() {
            hits += 1;
        }
    }
    Ok(hits as f64 / idx.len() as f64)
}

/// Fits a shared simplex-headed network to the labels by minibatch Adam on
/// the squared confidence error.
pub fn il_train(data: &ImitationDataset, n_patterns: usize, config: &IlConfig) -> Result<IlOutcome> {
    if data.is_empty() {
        return Err(Error::input("imitation dataset is empty"));
    }
    let width = data.inputs[0].len();
    let spec = MlpSpec::new(width, &config.hidden, n_patterns, crate::nn::HeadKind::Simplex)
        .with_input_scale(config.input_scale);
    let mut rng = seed::rng(config.seed, "il-train", 0);
    let mut net = Network::init(spec, &mut rng, 0.0)?;

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_hold = ((data.len() as f64) * config.holdout).round() as usize;
    let n_hold = n_hold.min(data.len() - 1);
    let (heldout, train) = order.split_at(n_hold);
    let mut train = train.to_vec();

    let initial_loss = il_loss(&net, data, &train)?;
    let mut opt = Adam::new(net.params.len(), config.learning_rate);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let batch = config.batch_size.max(1);
    for epoch in 0..config.epochs {
        train.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in train.chunks(batch) {
            let (l, g) = il_loss_gradient(&net, data, chunk).map_err(|e| Error::Training {
                stage: "train-division",
                iteration: epoch,
                detail: e.to_string(),
            })?;
            sum += l * chunk.len() as f64;
            net.params = opt.step(&net.params, &g);
        }
        let mean = sum / train.len() as f64;
        if !mean.is_finite() || !net.params.is_finite() {
            return Err(Error::Training {
                stage: "train-division",
                iteration: epoch,
                detail: format!("loss {mean}"),
            });
        }
        epoch_losses.push(mean);
    }
    let heldout_accuracy = argmax_accuracy(&net, data, heldout)?;
    Ok(IlOutcome {
        network: net,
        initial_loss,
        epoch_losses,
        heldout_accuracy,
        heldout_size: heldout.len(),
    })
}

/// Division confidence of one agent from its local input.
pub fn infer_confidence(pi_f: &Network, input: &[f64]) -> Result<ConfidenceVector> {
    Ok(ConfidenceVector(pi_f.forward(input)?))
}
