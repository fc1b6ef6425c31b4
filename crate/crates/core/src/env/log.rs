//! Line-delimited trajectory records.
//!
//! Each step is one line of space-separated decimals with six fractional
//! digits, in this order: `t`, per-agent `px py vx vy`, adversary `px py vx
//! vy`, per-agent `ax ay`, per-agent pattern size, then the reward
//! components `R_f R_a R_e R R_at`. A header line `# trajectory
//! n_agents=<N>` precedes the records.

use std::fmt::Write as _;

use super::{AdversaryState, AgentState, GlobalState};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::rewards::RewardBreakdown;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub state: GlobalState,
    pub actions: Vec<Vec2>,
    pub pattern_sizes: Vec<usize>,
    pub reward: RewardBreakdown,
    pub at_reward: f64,
}

pub fn header(n_agents: usize) -> String {
    format!("# trajectory n_agents={n_agents}")
}

fn push(line: &mut String, v: f64) {
    if !line.is_empty() {
        line.push(' ');
    }
    // Avoid "-0.000000" so equal states print identically.
    let v = if v == 0.0 { 0.0 } else { v };
    write!(line, "{v:.6}").expect("writing to a String cannot fail");
}

impl TrajectoryRecord {
    pub fn to_line(&self) -> String {
        let mut line = String::new();
        write!(line, "{}", self.state.step).unwrap();
        for a in &self.state.agents {
            for v in [a.position.x, a.position.y, a.velocity.x, a.velocity.y] {
                push(&mut line, v);
            }
        }
        let e = &self.state.adversary;
        for v in [e.position.x, e.position.y, e.velocity.x, e.velocity.y] {
            push(&mut line, v);
        }
        for a in &self.actions {
            push(&mut line, a.x);
            push(&mut line, a.y);
        }
        for c in &self.pattern_sizes {
            write!(line, " {c}").unwrap();
        }
        let r = &self.reward;
        for v in [r.formation, r.area, r.evasion, r.total, self.at_reward] {
            push(&mut line, v);
        }
        line
    }

    pub fn parse_line(line: &str, n_agents: usize, line_no: usize) -> Result<Self> {
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        let expected = 1 + 4 * n_agents + 4 + 2 * n_agents + n_agents + 5;
        if fields.len() != expected {
            return Err(err(format!("expected {expected} fields, found {}", fields.len())));
        }
        let num = |k: usize| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|e| err(format!("field {k} `{}`: {e}", fields[k])))
        };
        let step = fields[0]
            .parse::<usize>()
            .map_err(|e| err(format!("step `{}`: {e}", fields[0])))?;
        let mut k = 1;
        let mut agents = Vec::with_capacity(n_agents);
        for _ in 0..n_agents {
            agents.push(AgentState {
                position: Vec2::new(num(k)?, num(k + 1)?),
                velocity: Vec2::new(num(k + 2)?, num(k + 3)?),
            });
            k += 4;
        }
        let adversary = AdversaryState {
            position: Vec2::new(num(k)?, num(k + 1)?),
            velocity: Vec2::new(num(k + 2)?, num(k + 3)?),
        };
        k += 4;
        let mut actions = Vec::with_capacity(n_agents);
        for _ in 0..n_agents {
            actions.push(Vec2::new(num(k)?, num(k + 1)?));
            k += 2;
        }
        let mut pattern_sizes = Vec::with_capacity(n_agents);
        for _ in 0..n_agents {
            pattern_sizes.push(
                fields[k]
                    .parse::<usize>()
                    .map_err(|e| err(format!("pattern `{}`: {e}", fields[k])))?,
            );
            k += 1;
        }
        let reward = RewardBreakdown {
            formation: num(k)?,
            area: num(k + 1)?,
            evasion: num(k + 2)?,
            total: num(k + 3)?,
        };
        Ok(TrajectoryRecord {
            state: GlobalState {
                agents,
                adversary,
                step,
            },
            actions,
            pattern_sizes,
            reward,
            at_reward: num(k + 4)?,
        })
    }
}

pub fn write_log(records: &[TrajectoryRecord], n_agents: usize) -> String {
    let mut out = header(n_agents);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

pub fn parse_log(text: &str) -> Result<Vec<TrajectoryRecord>> {
    let mut lines = text.lines().enumerate();
    let n_agents = match lines.next() {
        Some((_, h)) => h
            .strip_prefix("# trajectory n_agents=")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or(Error::Parse {
                line: 1,
                message: "missing `# trajectory n_agents=<N>` header".into(),
            })?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty log".into(),
            })
        }
    };
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| TrajectoryRecord::parse_line(l, n_agents, i + 1))
        .collect()
}
