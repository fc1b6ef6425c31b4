//! Multi-agent PPO with a shared actor over local observations and a
//! centralized critic over the global state.

mod gae;
mod loss;
mod rollout;
mod trainer;

pub use gae::gae;
pub use loss::{clipped_objective_dlogp, clipped_policy_objective, value_loss, value_loss_dvalue};
pub use rollout::{collect_rollout, push_episode, RolloutBuffer, RolloutSpec, Transition};
pub use trainer::{
    curve_csv, policy_loss_gradient, ppo_update, train_formation_policy, value_loss_gradient,
    CurveRow, Learner, PpoConfig, RewardTransform, TrainOutcome, UpdateStats,
};

