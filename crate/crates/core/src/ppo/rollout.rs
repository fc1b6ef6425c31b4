use serde::{Deserialize, Serialize};

use super::{gae, PpoConfig};
use crate::comm::InvocationSchedule;
use crate::env::WorldConfig;
use crate::episode::{run_episode, ActionMode, DivisionMode, Episode, EpisodeSpec};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::rewards::RewardParams;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub state: Vec<f64>,
    /// Training reward (scaled, possibly augmented).
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// Transitions for whole episodes, one per agent per step, ordered by
/// episode, step, agent. Advantages and value targets are filled at
/// collection time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RolloutBuffer {
    pub transitions: Vec<Transition>,
    pub advantages: Vec<f64>,
    pub n_agents: usize,
    /// Undiscounted episode return of the task reward `R`.
    pub episode_returns: Vec<f64>,
    /// Per-episode mean of the inter-group reward.
    pub episode_at: Vec<f64>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn mean_return(&self) -> f64 {
        mean(&self.episode_returns)
    }

    pub fn mean_at(&self) -> f64 {
        mean(&self.episode_at)
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
        self.advantages.clear();
        self.episode_returns.clear();
        self.episode_at.clear();
    }

    /// Value target `Â + V_old` of transition `k`.
    pub fn target(&self, k: usize) -> f64 {
        self.advantages[k] + self.transitions[k].value
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// What to roll out and how to shape the training reward.
#[derive(Debug, Clone, Copy)]
pub struct RolloutSpec<'a> {
    pub world: &'a WorldConfig,
    pub rewards: &'a RewardParams,
    pub division: DivisionMode<'a>,
    pub policy: &'a Network,
    pub value: &'a Network,
    pub episodes: usize,
    pub seed: u64,
    /// Weight of the inter-group reward added to `R`.
    pub at_weight: f64,
}

/// Appends one simulated episode to `buffer`, computing its advantages.
pub fn push_episode(
    buffer: &mut RolloutBuffer,
    ep: &Episode,
    value: &Network,
    config: &PpoConfig,
    at_weight: f64,
) -> Result<()> {
    let n = ep.steps.first().map_or(0, |s| s.choices.len());
    buffer.n_agents = n;
    let mut rewards = Vec::with_capacity(ep.steps.len());
    let mut values = Vec::with_capacity(ep.steps.len() + 1);
    for s in &ep.steps {
        rewards.push(
            config
                .reward_transform
                .apply(config.reward_scale * (s.reward.total + at_weight * s.at_reward)),
        );
        values.push(value.value(&s.state.to_features())?);
    }
    if let Some(last) = ep.steps.last() {
        values.push(value.value(&last.next_state.to_features())?);
    } else {
        values.push(0.0);
    }
    let adv = gae(&rewards, &values, config.gamma, config.lambda)?;
    let t_last = ep.steps.len().saturating_sub(1);
    for (t, s) in ep.steps.iter().enumerate() {
        let state = s.state.to_features();
        for i in 0..n {
            buffer.transitions.push(Transition {
                observation: s.policy_inputs[i].clone(),
                action: s.actions[i].clone(),
                log_prob: s.log_probs[i],
                state: state.clone(),
                reward: rewards[t],
                value: values[t],
                done: t == t_last,
            });
            buffer.advantages.push(adv[t]);
        }
    }
    buffer.episode_returns.push(ep.total_reward());
    buffer.episode_at.push(ep.mean_at_reward());
    Ok(())
}

/// Samples `episodes` episodes with the shared policy and fills a buffer of
/// `episodes · T · N` transitions.
pub fn collect_rollout(spec: &RolloutSpec<'_>, config: &PpoConfig) -> Result<RolloutBuffer> {
    if spec.policy.spec.input != spec.world.observation_width() {
        return Err(Error::input(format!(
            "policy input width {} does not match observation width {}",
            spec.policy.spec.input,
            spec.world.observation_width()
        )));
    }
    if spec.value.spec.input != spec.world.state_width() {
        return Err(Error::input(format!(
            "value input width {} does not match state width {}",
            spec.value.spec.input,
            spec.world.state_width()
        )));
    }
    let mut buffer = RolloutBuffer::default();
    for e in 0..spec.episodes {
        let ep = run_episode(&EpisodeSpec {
            world: spec.world,
            rewards: spec.rewards,
            division: spec.division,
            policy: spec.policy,
            actions: ActionMode::Sample,
            schedule: InvocationSchedule::EveryStep,
            seed: seed::derive(spec.seed, "rollout", e as u64),
        })?;
        push_episode(&mut buffer, &ep, spec.value, config, spec.at_weight)?;
    }
    Ok(buffer)
}
