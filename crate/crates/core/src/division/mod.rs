//! High-level formation switching: the centralized and leader-follower
//! interval rules, the imitation-learned decentralized confidence policy,
//! neighbour confidence exchange and the masking step that turns a chosen
//! pattern into the low-level policy's input.

mod imitation;
mod masking;
mod rules;

pub use imitation::{
    argmax_accuracy, il_collect, il_loss, il_loss_gradient, il_train, infer_confidence,
    IlConfig, IlOutcome, ImitationDataset,
};
pub use masking::{
    aggregate_importance, determine_pattern, exchange_confidence, reshape_observation,
    EnhancedConfidence, Reshaped, StaleCache,
};
pub use rules::{
    central_division, group_beta, leader_follower_division, ConfidenceVector, SafetyIntervals,
};
