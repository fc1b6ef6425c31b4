//! Well-formed swarm pursuit avoidance: a deterministic particle world,
//! formation rewards, shared-parameter MAPPO, policy distillation,
//! learned decentralized division control, alternative training and
//! communication-overhead accounting.
//!
//! The pipeline runs in stages, each available both as a library function
//! in [`harness`] and as a subcommand of the `swarm` binary:
//!
//! 1. train one formation policy per pattern,
//! 2. distill them into a single student,
//! 3. imitate the central division rule with a small network,
//! 4. fine-tune the student under the learned division policy,
//! 5. evaluate baselines and account communication overhead.
//!
//! All randomness flows from explicit seeds through [`seed`], so every
//! stage is reproducible byte for byte.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alt_training;
pub mod comm;
pub mod distill;
pub mod division;
pub mod env;
pub mod episode;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod nn;
pub mod ppo;
pub mod rewards;
pub mod seed;

pub use error::{Error, Result};
pub use geometry::Vec2;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/world.md")]
    mod world {}
    #[doc = include_str!("../../../book/src/rewards.md")]
    mod rewards {}
    #[doc = include_str!("../../../book/src/mappo.md")]
    mod mappo {}
    #[doc = include_str!("../../../book/src/distillation.md")]
    mod distillation {}
    #[doc = include_str!("../../../book/src/division.md")]
    mod division {}
    #[doc = include_str!("../../../book/src/alt_training.md")]
    mod alt_training {}
    #[doc = include_str!("../../../book/src/overhead.md")]
    mod overhead {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
