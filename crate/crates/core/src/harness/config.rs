use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alt_training::AtConfig;
use crate::comm::{Architecture, InvocationSchedule, LinkBudget};
use crate::distill::DistillConfig;
use crate::division::IlConfig;
use crate::env::WorldConfig;
use crate::error::{Error, Result};
use crate::ppo::PpoConfig;
use crate::rewards::RewardParams;

/// The compared division-control schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Baseline {
    /// Random division instructions.
    #[serde(rename = "RAN")]
    Ran,
    /// Centralized rule.
    #[serde(rename = "CE")]
    Ce,
    /// Leader-follower rule.
    #[serde(rename = "LF")]
    Lf,
    /// Centralized rule with a fine-tuned student.
    #[serde(rename = "AT")]
    At,
    /// Imitation-learned decentralized division.
    #[serde(rename = "IL")]
    Il,
    /// Imitation-learned division with a fine-tuned student.
    #[serde(rename = "IA")]
    Ia,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decentralization {
    None,
    Partial,
    Full,
}

impl Baseline {
    pub const ALL: [Baseline; 6] = [
        Baseline::Ran,
        Baseline::Ce,
        Baseline::Lf,
        Baseline::At,
        Baseline::Il,
        Baseline::Ia,
    ];

    pub fn decentralization(self) -> Decentralization {
        match self {
            Baseline::Lf => Decentralization::Partial,
            Baseline::Il | Baseline::Ia => Decentralization::Full,
            _ => Decentralization::None,
        }
    }

    pub fn with_alt_training(self) -> bool {
        matches!(self, Baseline::At | Baseline::Ia)
    }

    pub fn architecture(self) -> Architecture {
        match self.decentralization() {
            Decentralization::None => Architecture::Centralized,
            Decentralization::Partial => Architecture::LeaderFollower,
            Decentralization::Full => Architecture::Decentralized,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Baseline::Ran => "RAN",
            Baseline::Ce => "CE",
            Baseline::Lf => "LF",
            Baseline::At => "AT",
            Baseline::Il => "IL",
            Baseline::Ia => "IA",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::input(format!("unknown baseline `{s}`; expected one of RAN, CE, LF, AT, IL, IA")))
    }
}

/// Every knob of the pipeline. Loaded from TOML with one key per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub baseline: Baseline,
    pub eval_episodes: usize,
    pub invocation: InvocationSchedule,
    pub formation_iterations: usize,
    pub il_episodes: usize,
    pub world: WorldConfig,
    pub rewards: RewardParams,
    pub ppo: PpoConfig,
    pub distill: DistillConfig,
    pub il: IlConfig,
    pub at: AtConfig,
    pub budget: LinkBudget,
}

impl RunConfig {
    /// Eight agents, octagon and squares, 200-step episodes, 600
    /// evaluation episodes.
    pub fn full() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("runs/full"),
            baseline: Baseline::Ia,
            eval_episodes: 600,
            invocation: InvocationSchedule::EveryStep,
            formation_iterations: 300,
            il_episodes: 40,
            world: WorldConfig::full(),
            rewards: RewardParams::default(),
            ppo: PpoConfig::default(),
            distill: DistillConfig::default(),
            il: IlConfig::default(),
            at: AtConfig::default(),
            budget: LinkBudget::default(),
        }
    }

    /// Four agents, square and pairs, 100-step episodes; runs end to end in
    /// minutes on one core.
    pub fn desk() -> Self {
        RunConfig {
            out_dir: PathBuf::from("runs/desk"),
            eval_episodes: 50,
            formation_iterations: 150,
            il_episodes: 30,
            world: WorldConfig::desk(),
            ppo: PpoConfig {
                hidden: vec![32, 32],
                actor_lr: 1e-3,
                episodes_per_iteration: 8,
                init_log_std: -1.0,
                ..PpoConfig::default()
            },
            distill: DistillConfig {
                capacity: 20_000,
                episodes_per_pattern: 20,
                epochs: 40,
                hidden: vec![32, 32],
                ..DistillConfig::default()
            },
            il: IlConfig {
                hidden: vec![32, 32],
                epochs: 40,
                ..IlConfig::default()
            },
            at: AtConfig {
                iterations: 30,
                ..AtConfig::default()
            },
            ..RunConfig::full()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.rewards.validate()?;
        self.ppo.validate()?;
        if (self.rewards.target_radius - self.world.target_radius).abs() > 0.0 {
            return Err(Error::config("rewards.target_radius must equal world.target_radius"));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}
