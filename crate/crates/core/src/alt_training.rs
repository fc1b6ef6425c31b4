//! Fine-tuning the distilled low-level policy with the division policy held
//! fixed, on the task reward augmented by the inter-group distance reward.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::WorldConfig;
use crate::episode::DivisionMode;
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::ppo::{collect_rollout, ppo_update, Learner, PpoConfig, RolloutBuffer, RolloutSpec, UpdateStats};
use crate::rewards::RewardParams;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtConfig {
    pub iterations: usize,
    /// Weight of the inter-group reward in `R + w·R_at`.
    pub at_weight: f64,
    /// Leading iterations that fit only the fresh critic.
    pub critic_warmup: usize,
    pub actor_lr: f64,
}

impl Default for AtConfig {
    fn default() -> Self {
        AtConfig {
            iterations: 40,
            at_weight: 1.0,
            critic_warmup: 5,
            actor_lr: 1e-4,
        }
    }
}

/// Joint rollouts: division instructions come from `division` (frozen),
/// accelerations from the student. Each transition's reward carries
/// `w·R_at` on top of `R`.
#[allow(clippy::too_many_arguments)]
pub fn collect_joint(
    world: &WorldConfig,
    rewards: &RewardParams,
    student: &Network,
    critic: &Network,
    division: DivisionMode<'_>,
    episodes: usize,
    at_weight: f64,
    config: &PpoConfig,
    seed_: u64,
) -> Result<RolloutBuffer> {
    collect_rollout(
        &RolloutSpec {
            world,
            rewards,
            division,
            policy: student,
            value: critic,
            episodes,
            seed: seed_,
            at_weight,
        },
        config,
    )
}

/// One update phase over a collected joint buffer; the same machinery as
/// single-pattern training.
pub fn fine_tune_step<R: Rng + ?Sized>(
    learner: &mut Learner,
    buffer: &RolloutBuffer,
    config: &PpoConfig,
    update_actor: bool,
    rng: &mut R,
) -> Result<UpdateStats> {
    ppo_update(learner, buffer, config, update_actor, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineTuneRow {
    pub iteration: usize,
    pub mean_reward: f64,
    pub mean_at_reward: f64,
}

pub fn fine_tune_csv(rows: &[FineTuneRow]) -> String {
    let mut out = String::from("iteration,mean_R,mean_R_at\n");
    for r in rows {
        out.push_str(&format!("{},{:.6},{:.6}\n", r.iteration, r.mean_reward, r.mean_at_reward));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneOutcome {
    pub learner: Learner,
    pub curve: Vec<FineTuneRow>,
}

/// Alternates joint collection and PPO updates of the student. The
/// division policy is only read.
pub fn fine_tune(
    world: &WorldConfig,
    rewards: &RewardParams,
    student: &Network,
    division: DivisionMode<'_>,
    at: &AtConfig,
    ppo: &PpoConfig,
    seed_: u64,
) -> Result<FineTuneOutcome> {
    ppo.validate()?;
    let config = PpoConfig {
        actor_lr: at.actor_lr,
        ..ppo.clone()
    };
    let mut init_rng = seed::rng(seed_, "at-critic", 0);
    let critic = Learner::fresh_critic(world, &config, &mut init_rng)?;
    let mut learner = Learner::from_networks(student.clone(), critic, &config);
    let mut rng = seed::rng(seed_, "at-update", 0);
    let mut curve = Vec::with_capacity(at.iterations);
    for it in 0..at.iterations {
        let buffer = collect_joint(
            world,
            rewards,
            &learner.policy,
            &learner.value,
            division,
            config.episodes_per_iteration,
            at.at_weight,
            &config,
            seed::derive(seed_, "at-rollout", it as u64),
        )?;
        let stats = fine_tune_step(&mut learner, &buffer, &config, it >= at.critic_warmup, &mut rng)?;
        if !stats.policy_loss.is_finite() || !learner.policy.params.is_finite() {
            return Err(Error::Training {
                stage: "alt-train",
                iteration: it,
                detail: format!("policy loss {}, value loss {}", stats.policy_loss, stats.value_loss),
            });
        }
        curve.push(FineTuneRow {
            iteration: it,
            mean_reward: buffer.mean_return(),
            mean_at_reward: buffer.mean_at(),
        });
    }
    Ok(FineTuneOutcome { learner, curve })
}
