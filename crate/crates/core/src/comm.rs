//! Bit-level communication-overhead models for centralized,
//! leader-follower and decentralized division control, and per-episode
//! accounting over logged communication graphs.
//!
//! Per invoked step, with `N` agents and budget `(Ω_p, Ω_e, Ω_z, Ω_s)`:
//!
//! | architecture    | up-link          | down-link          |
//! |-----------------|------------------|--------------------|
//! | centralized     | `N·Ω_p + Ω_e`    | `N·Ω_z`            |
//! | leader-follower | `(N−1)·Ω_p`      | `(N−1)·Ω_z`        |
//! | decentralized   | 0                | `Σ_i deg_i·(Ω_s+Ω_z)` |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub agent_position_bits: u64,
    pub adversary_position_bits: u64,
    pub instruction_bits: u64,
    pub sequence_bits: u64,
}

impl Default for LinkBudget {
    /// Two 32-bit floats per position, a 1-bit instruction for two
    /// patterns, a 3-bit sequence number for eight agents.
    fn default() -> Self {
        LinkBudget {
            agent_position_bits: 64,
            adversary_position_bits: 64,
            instruction_bits: 1,
            sequence_bits: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepCost {
    pub up: u64,
    pub down: u64,
}

impl StepCost {
    pub fn total(self) -> u64 {
        self.up + self.down
    }
}

pub fn centralized_step_cost(n_agents: usize, budget: &LinkBudget) -> StepCost {
    let n = n_agents as u64;
    StepCost {
        up: n * budget.agent_position_bits + budget.adversary_position_bits,
        down: n * budget.instruction_bits,
    }
}

pub fn leader_follower_step_cost(n_agents: usize, budget: &LinkBudget) -> StepCost {
    let followers = n_agents.saturating_sub(1) as u64;
    StepCost {
        up: followers * budget.agent_position_bits,
        down: followers * budget.instruction_bits,
    }
}

/// Broadcast cost of one confidence exchange; all of it is down-link.
pub fn decentralized_step_cost(degrees: &[usize], budget: &LinkBudget) -> StepCost {
    let deg: u64 = degrees.iter().map(|&d| d as u64).sum();
    StepCost {
        up: 0,
        down: deg * (budget.sequence_bits + budget.instruction_bits),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Centralized,
    LeaderFollower,
    Decentralized,
}

impl Architecture {
    pub fn step_cost(self, degrees: &[usize], budget: &LinkBudget) -> StepCost {
        match self {
            Architecture::Centralized => centralized_step_cost(degrees.len(), budget),
            Architecture::LeaderFollower => leader_follower_step_cost(degrees.len(), budget),
            Architecture::Decentralized => decentralized_step_cost(degrees, budget),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Centralized => "centralized",
            Architecture::LeaderFollower => "leader-follower",
            Architecture::Decentralized => "decentralized",
        })
    }
}

/// When division control runs (and is charged).
/// Serialized as its string form (`every-step`, `every-k:<k>`,
/// `on-boundary`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InvocationSchedule {
    #[default]
    EveryStep,
    /// Steps `0, k, 2k, …`.
    EveryK(usize),
    /// Step 0 and every step where the adversary distance of some group
    /// crosses into a different safety interval.
    OnBoundary,
}

impl InvocationSchedule {
    pub fn invoked(self, t: usize, boundary_crossed: bool) -> bool {
        match self {
            InvocationSchedule::EveryStep => true,
            InvocationSchedule::EveryK(k) => t.is_multiple_of(k.max(1)),
            InvocationSchedule::OnBoundary => t == 0 || boundary_crossed,
        }
    }
}

impl FromStr for InvocationSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "every-step" => Ok(InvocationSchedule::EveryStep),
            "on-boundary" => Ok(InvocationSchedule::OnBoundary),
            _ => {
                let k = s
                    .strip_prefix("every-k:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|k| *k > 0)
                    .ok_or_else(|| {
                        Error::input(format!(
                            "invocation schedule `{s}`; expected every-step, every-k:<k> or on-boundary"
                        ))
                    })?;
                Ok(InvocationSchedule::EveryK(k))
            }
        }
    }
}

impl fmt::Display for InvocationSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvocationSchedule::EveryStep => f.write_str("every-step"),
            InvocationSchedule::EveryK(k) => write!(f, "every-k:{k}"),
            InvocationSchedule::OnBoundary => f.write_str("on-boundary"),
        }
    }
}

impl Serialize for InvocationSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for InvocationSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Communication graph summary of one simulated step.
#[derive(Debug, Clone, PartialEq)]
pub struct CommStep {
    pub t: usize,
    pub boundary_crossed: bool,
    /// `|ξ_i|` per agent.
    pub degrees: Vec<usize>,
}

/// Per-episode communication log, one line per step: `t boundary deg_0 …
/// deg_{N-1}` after a `# comm n_agents=<N>` header.
#[derive(Debug, Clone, PartialEq)]
pub struct CommLog {
    pub n_agents: usize,
    pub steps: Vec<CommStep>,
}

impl CommLog {
    pub fn to_text(&self) -> String {
        let mut out = format!("# comm n_agents={}\n", self.n_agents);
        for s in &self.steps {
            out.push_str(&format!("{} {}", s.t, u8::from(s.boundary_crossed)));
            for d in &s.degrees {
                out.push_str(&format!(" {d}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let n_agents = lines
            .next()
            .and_then(|(_, h)| h.strip_prefix("# comm n_agents="))
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or(Error::Parse {
                line: 1,
                message: "missing `# comm n_agents=<N>` header".into(),
            })?;
        let mut steps = Vec::new();
        for (k, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |m: String| Error::Parse { line: k + 1, message: m };
            let nums: Vec<usize> = line
                .split_ascii_whitespace()
                .map(|f| f.parse::<usize>().map_err(|e| err(format!("`{f}`: {e}"))))
                .collect::<Result<_>>()?;
            if nums.len() != 2 + n_agents {
                return Err(err(format!("expected {} fields, found {}", 2 + n_agents, nums.len())));
            }
            steps.push(CommStep {
                t: nums[0],
                boundary_crossed: nums[1] != 0,
                degrees: nums[2..].to_vec(),
            });
        }
        Ok(CommLog { n_agents, steps })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadLedger {
    pub architecture: Architecture,
    pub up_bits: Vec<u64>,
    pub down_bits: Vec<u64>,
    pub invocations: usize,
}

pub const BITS_PER_KB: f64 = 8.0 * 1000.0;

impl OverheadLedger {
    pub fn empty(architecture: Architecture) -> Self {
        OverheadLedger {
            architecture,
            up_bits: Vec::new(),
            down_bits: Vec::new(),
            invocations: 0,
        }
    }

    pub fn up_total(&self) -> u64 {
        self.up_bits.iter().sum()
    }

    pub fn down_total(&self) -> u64 {
        self.down_bits.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.up_total() + self.down_total()
    }

    pub fn up_kb(&self) -> f64 {
        self.up_total() as f64 / BITS_PER_KB
    }

    pub fn down_kb(&self) -> f64 {
        self.down_total() as f64 / BITS_PER_KB
    }

    pub fn total_kb(&self) -> f64 {
        self.total() as f64 / BITS_PER_KB
    }

    /// Appends another episode's per-step entries.
    pub fn absorb(&mut self, other: &OverheadLedger) {
        self.up_bits.extend_from_slice(&other.up_bits);
        self.down_bits.extend_from_slice(&other.down_bits);
        self.invocations += other.invocations;
    }
}

/// Charges `architecture`'s step cost on every step the schedule invokes
/// division control. Non-invoked steps record zero.
pub fn episode_report(
    log: &CommLog,
    budget: &LinkBudget,
    schedule: InvocationSchedule,
    architecture: Architecture,
) -> Result<OverheadLedger> {
    let mut ledger = OverheadLedger::empty(architecture);
    for s in &log.steps {
        if s.degrees.len() != log.n_agents {
            return Err(Error::input(format!(
                "step {} carries {} degrees for {} agents",
                s.t,
                s.degrees.len(),
                log.n_agents
            )));
        }
        let cost = if schedule.invoked(s.t, s.boundary_crossed) {
            ledger.invocations += 1;
            architecture.step_cost(&s.degrees, budget)
        } else {
            StepCost::default()
        };
        ledger.up_bits.push(cost.up);
        ledger.down_bits.push(cost.down);
    }
    Ok(ledger)
}

/// One row of the overhead table.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadRow {
    pub method: String,
    pub ledger: OverheadLedger,
    /// Episodes the ledger spans; KB figures are averaged over them.
    pub episodes: usize,
}

pub fn overhead_csv(rows: &[OverheadRow]) -> String {
    let mut out = String::from("# units: KB = 1000 bytes, averaged per episode\n");
    out.push_str("method,uplink_kb,downlink_kb,overall_kb\n");
    for r in rows {
        let e = r.episodes.max(1) as f64;
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4}\n",
            r.method,
            r.ledger.up_kb() / e,
            r.ledger.down_kb() / e,
            r.ledger.total_kb() / e
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centralized_costs() {
        let b = LinkBudget::default();
        let c = centralized_step_cost(8, &b);
        assert_eq!((c.up, c.down, c.total()), (576, 8, 584));
        let c = centralized_step_cost(1, &b);
        assert_eq!((c.up, c.down), (128, 1));
        let zero_z = LinkBudget { instruction_bits: 0, ..b };
        assert_eq!(centralized_step_cost(8, &zero_z).down, 0);
    }

    #[test]
    fn leader_follower_costs() {
        let b = LinkBudget::default();
        let c = leader_follower_step_cost(8, &b);
        assert_eq!((c.up, c.down, c.total()), (448, 7, 455));
        assert_eq!(leader_follower_step_cost(1, &b).total(), 0);
        let c = leader_follower_step_cost(2, &b);
        assert_eq!((c.up, c.down), (64, 1));
    }

    #[test]
    fn decentralized_costs() {
        let b = LinkBudget::default();
        assert_eq!(decentralized_step_cost(&[7; 8], &b).total(), 224);
        assert_eq!(decentralized_step_cost(&[0; 8], &b).total(), 0);
        assert_eq!(decentralized_step_cost(&[1, 1, 0, 0, 0, 0, 0, 0], &b).total(), 8);
        assert_eq!(decentralized_step_cost(&[7; 8], &b).up, 0);
    }

    fn full_log(steps: usize) -> CommLog {
        CommLog {
            n_agents: 8,
            steps: (0..steps)
                .map(|t| CommStep { t, boundary_crossed: t == 50, degrees: vec![7; 8] })
                .collect(),
        }
    }

    #[test]
    fn every_step_centralized_episode() {
        let ledger = episode_report(&full_log(200), &LinkBudget::default(), InvocationSchedule::EveryStep, Architecture::Centralized).unwrap();
        assert_eq!(ledger.total(), 584 * 200);
        assert!((ledger.total_kb() - 14.6).abs() < 1e-12);
        assert_eq!(ledger.invocations, 200);
    }

    #[test]
    fn zero_invocations_cost_nothing() {
        let log = CommLog { n_agents: 8, steps: Vec::new() };
        let ledger = episode_report(&log, &LinkBudget::default(), InvocationSchedule::EveryStep, Architecture::Centralized).unwrap();
        assert_eq!(ledger.total_kb(), 0.0);
    }

    #[test]
    fn schedules_select_steps() {
        let b = LinkBudget::default();
        let every3 = episode_report(&full_log(10), &b, InvocationSchedule::EveryK(3), Architecture::LeaderFollower).unwrap();
        assert_eq!(every3.invocations, 4);
        let boundary = episode_report(&full_log(100), &b, InvocationSchedule::OnBoundary, Architecture::Centralized).unwrap();
        assert_eq!(boundary.invocations, 2);
        assert_eq!(boundary.total(), 2 * 584);
    }

    #[test]
    fn missing_degrees_rejected() {
        let mut log = full_log(3);
        log.steps[1].degrees.pop();
        assert!(episode_report(&log, &LinkBudget::default(), InvocationSchedule::EveryStep, Architecture::Decentralized).is_err());
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!("every-step".parse::<InvocationSchedule>().unwrap(), InvocationSchedule::EveryStep);
        assert_eq!("every-k:5".parse::<InvocationSchedule>().unwrap(), InvocationSchedule::EveryK(5));
        assert_eq!("on-boundary".parse::<InvocationSchedule>().unwrap(), InvocationSchedule::OnBoundary);
        assert!("every-k:0".parse::<InvocationSchedule>().is_err());
        for s in ["every-step", "every-k:7", "on-boundary"] {
            assert_eq!(s.parse::<InvocationSchedule>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn comm_log_round_trip() {
        let log = full_log(4);
        assert_eq!(CommLog::parse(&log.to_text()).unwrap(), log);
        assert!(CommLog::parse("# comm n_agents=2\n0 0 1\n").is_err());
    }
}
