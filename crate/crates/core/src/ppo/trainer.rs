use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    clipped_objective_dlogp, clipped_policy_objective, collect_rollout, value_loss,
    value_loss_dvalue, RolloutBuffer, RolloutSpec,
};
use crate::env::WorldConfig;
use crate::episode::DivisionMode;
use crate::error::{Error, Result};
use crate::nn::{
    clip_grad_norm, gaussian_log_prob, gaussian_log_prob_grad, gradient, Adam, HeadKind, MlpSpec,
    Network, ParamVector, SampleLoss,
};
use crate::rewards::RewardParams;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub clip: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub normalize_advantages: bool,
    pub max_grad_norm: f64,
    pub episodes_per_iteration: usize,
    pub hidden: Vec<usize>,
    /// Factor applied to actor and critic inputs (raw positions in meters).
    pub input_scale: f64,
    pub init_log_std: f64,
    /// Multiplies every training reward before advantage estimation.
    pub reward_scale: f64,
    /// Applied to the scaled training reward.
    pub reward_transform: RewardTransform,
}

/// Shaping of the per-step training reward. The reported rewards are never
/// transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardTransform {
    Linear,
    /// `sign(x)·ln(1 + |x|)`: monotone, keeps small rewards nearly linear
    /// and turns the exponential area penalty far outside the target area
    /// into a roughly linear one.
    #[default]
    SignedLog,
}

impl RewardTransform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            RewardTransform::Linear => x,
            RewardTransform::SignedLog => x.signum() * x.abs().ln_1p(),
        }
    }
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip: 0.2,
            gamma: 0.8,
            lambda: 0.95,
            epochs: 10,
            minibatch_size: 256,
            actor_lr: 3e-4,
            critic_lr: 1e-3,
            normalize_advantages: true,
            max_grad_norm: 1.0,
            episodes_per_iteration: 4,
            hidden: vec![64, 64],
            input_scale: 0.25,
            init_log_std: -0.5,
            reward_scale: 1.0,
            reward_transform: RewardTransform::SignedLog,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config("lambda must lie in [0, 1]"));
        }
        if !(self.clip > 0.0) {
            return Err(Error::config("clip must be positive"));
        }
        if self.minibatch_size == 0 {
            return Err(Error::config("minibatch_size must be positive"));
        }
        Ok(())
    }
}

/// Actor, critic and their optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    pub policy: Network,
    pub value: Network,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
}

impl Learner {
    pub fn new(world: &WorldConfig, config: &PpoConfig, seed_: u64) -> Result<Self> {
        let mut rng = seed::rng(seed_, "learner-init", 0);
        let policy = Network::init(
            MlpSpec::new(world.observation_width(), &config.hidden, 2, HeadKind::Gaussian)
                .with_input_scale(config.input_scale),
            &mut rng,
            config.init_log_std,
        )?;
        let value = Self::fresh_critic(world, config, &mut rng)?;
        Ok(Self::from_networks(policy, value, config))
    }

    pub fn fresh_critic<R: Rng + ?Sized>(world: &WorldConfig, config: &PpoConfig, rng: &mut R) -> Result<Network> {
        Network::init(
            MlpSpec::new(world.state_width(), &config.hidden, 1, HeadKind::Value)
                .with_input_scale(config.input_scale),
            rng,
            0.0,
        )
    }

    pub fn from_networks(policy: Network, value: Network, config: &PpoConfig) -> Self {
        Learner {
            actor_opt: Adam::new(policy.params.len(), config.actor_lr),
            critic_opt: Adam::new(value.params.len(), config.critic_lr),
            policy,
            value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub mean_ratio: f64,
}

/// Negated clipped surrogate over a minibatch and its parameter gradient.
/// `advantages` are the (possibly normalized) minibatch advantages.
pub fn policy_loss_gradient(
    policy: &Network,
    buffer: &RolloutBuffer,
    idx: &[usize],
    advantages: &[f64],
    clip: f64,
) -> Result<(f64, ParamVector, f64)> {
    let scale = 1.0 / idx.len().max(1) as f64;
    let mut ratio_sum = 0.0;
    let (loss, grad) = gradient(
        &policy.spec,
        &policy.params,
        idx.iter().map(|&k| &buffer.transitions[k].observation),
        |j, mean, log_std| {
            let tr = &buffer.transitions[idx[j]];
            let adv = advantages[j];
            let lp = gaussian_log_prob(mean, log_std, &tr.action);
            let ratio = (lp - tr.log_prob).exp();
            ratio_sum += ratio;
            let obj = clipped_policy_objective(ratio, adv, clip);
            let d_lp = -clipped_objective_dlogp(ratio, adv, clip) * scale;
            let (dm, ds) = gaussian_log_prob_grad(mean, log_std, &tr.action);
            SampleLoss {
                loss: -obj * scale,
                d_output: dm.into_iter().map(|v| v * d_lp).collect(),
                d_log_std: ds.into_iter().map(|v| v * d_lp).collect(),
            }
        },
    )?;
    Ok((loss, grad, ratio_sum * scale))
}

/// Mean critic regression error over a minibatch and its gradient.
pub fn value_loss_gradient(value: &Network, buffer: &RolloutBuffer, idx: &[usize]) -> Result<(f64, ParamVector)> {
    let scale = 1.0 / idx.len().max(1) as f64;
    gradient(
        &value.spec,
        &value.params,
        idx.iter().map(|&k| &buffer.transitions[k].state),
        |j, out, _| {
            let k = idx[j];
            let tr = &buffer.transitions[k];
            SampleLoss {
                loss: value_loss(out[0], buffer.advantages[k], tr.value) * scale,
                d_output: vec![value_loss_dvalue(out[0], buffer.advantages[k], tr.value) * scale],
                d_log_std: Vec::new(),
            }
        },
    )
}

fn normalized(adv: &[f64]) -> Vec<f64> {
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    adv.iter().map(|a| (a - mean) / (std + 1e-8)).collect()
}

/// Several epochs of minibatch updates over a collected buffer.
/// `update_actor = false` trains the critic alone.
pub fn ppo_update<R: Rng + ?Sized>(
    learner: &mut Learner,
    buffer: &RolloutBuffer,
    config: &PpoConfig,
    update_actor: bool,
    rng: &mut R,
) -> Result<UpdateStats> {
    if buffer.advantages.len() != buffer.len() {
        return Err(Error::input("advantages must be computed before the update"));
    }
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut stats = UpdateStats::default();
    let mut batches = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            let raw: Vec<f64> = chunk.iter().map(|&k| buffer.advantages[k]).collect();
            let adv = if config.normalize_advantages && chunk.len() > 1 {
                normalized(&raw)
            } else {
                raw
            };
            let (pl, mut pg, ratio) = policy_loss_gradient(&learner.policy, buffer, chunk, &adv, config.clip)?;
            let (vl, mut vg) = value_loss_gradient(&learner.value, buffer, chunk)?;
            if update_actor {
                clip_grad_norm(&mut pg, config.max_grad_norm);
                learner.policy.params = learner.actor_opt.step(&learner.policy.params, &pg);
            }
            clip_grad_norm(&mut vg, config.max_grad_norm);
            learner.value.params = learner.critic_opt.step(&learner.value.params, &vg);
            stats.policy_loss += pl;
            stats.value_loss += vl;
            stats.mean_ratio += ratio;
            batches += 1;
        }
    }
    if batches > 0 {
        let b = batches as f64;
        stats.policy_loss /= b;
        stats.value_loss /= b;
        stats.mean_ratio /= b;
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub iteration: usize,
    pub mean_reward: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub mean_ratio: f64,
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("iteration,mean_reward,policy_loss,value_loss,mean_ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            r.iteration, r.mean_reward, r.policy_loss, r.value_loss, r.mean_ratio
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub learner: Learner,
    pub curve: Vec<CurveRow>,
}

fn check_finite(stage: &'static str, iteration: usize, stats: &UpdateStats, learner: &Learner) -> Result<()> {
    if !stats.policy_loss.is_finite()
        || !stats.value_loss.is_finite()
        || !learner.policy.params.is_finite()
        || !learner.value.params.is_finite()
    {
        return Err(Error::Training {
            stage,
            iteration,
            detail: format!(
                "policy loss {}, value loss {}, mean ratio {}",
                stats.policy_loss, stats.value_loss, stats.mean_ratio
            ),
        });
    }
    Ok(())
}

/// MAPPO for a single fixed pattern: every agent holds `pattern` for the
/// whole episode and all agents share the actor.
pub fn train_formation_policy(
    world: &WorldConfig,
    rewards: &RewardParams,
    pattern: usize,
    iterations: usize,
    config: &PpoConfig,
    seed_: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    if pattern >= world.n_patterns() {
        return Err(Error::input(format!("pattern index {pattern} out of range")));
    }
    let mut learner = Learner::new(world, config, seed_)?;
    let mut rng = seed::rng(seed_, "ppo-update", pattern as u64);
    let mut curve = Vec::with_capacity(iterations);
    for it in 0..iterations {
        let buffer = collect_rollout(
            &RolloutSpec {
                world,
                rewards,
                division: DivisionMode::Fixed(pattern),
                policy: &learner.policy,
                value: &learner.value,
                episodes: config.episodes_per_iteration,
                seed: seed::derive(seed_, "formation-rollout", it as u64),
                at_weight: 0.0,
            },
            config,
        )?;
        let stats = ppo_update(&mut learner, &buffer, config, true, &mut rng)?;
        check_finite("train-formation", it, &stats, &learner)?;
        curve.push(CurveRow {
            iteration: it,
            mean_reward: buffer.mean_return(),
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            mean_ratio: stats.mean_ratio,
        });
    }
    Ok(TrainOutcome { learner, curve })
}
