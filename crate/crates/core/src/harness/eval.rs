use std::thread;

use crate::comm::{episode_report, Architecture, CommLog, InvocationSchedule, LinkBudget, OverheadLedger};
use crate::env::log::{self, TrajectoryRecord};
use crate::episode::{run_episode, ActionMode, DivisionMode, Episode, EpisodeSpec};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::seed;

use super::config::{Baseline, RunConfig};

/// Networks a baseline runs with. `division` is required for IL and IA.
#[derive(Debug, Clone, Copy)]
pub struct BaselineNets<'a> {
    pub student: &'a Network,
    pub division: Option<&'a Network>,
}

/// Aggregates over the evaluation episodes. Event counts are numbers of
/// steps, summed over episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub baseline: Baseline,
    pub episodes: usize,
    pub mean_reward: f64,
    pub collisions: usize,
    pub disconnections: usize,
    pub mean_at_reward: f64,
    /// Fraction of agent-steps whose acted-on pattern differs from the
    /// central rule's.
    pub label_mismatch: f64,
    pub ledger: OverheadLedger,
}

impl EvalSummary {
    pub fn empty(baseline: Baseline) -> Self {
        EvalSummary {
            baseline,
            episodes: 0,
            mean_reward: 0.0,
            collisions: 0,
            disconnections: 0,
            mean_at_reward: 0.0,
            label_mismatch: 0.0,
            ledger: OverheadLedger::empty(baseline.architecture()),
        }
    }

    pub fn csv_header() -> &'static str {
        "baseline,episodes,mean_reward,collisions,disconnections,mean_R_at,label_mismatch,uplink_kb,downlink_kb,overall_kb"
    }

    /// One CSV row; KB figures are per episode.
    pub fn csv_row(&self) -> String {
        let e = self.episodes.max(1) as f64;
        format!(
            "{},{},{:.6},{},{},{:.6},{:.6},{:.4},{:.4},{:.4}",
            self.baseline,
            self.episodes,
            self.mean_reward,
            self.collisions,
            self.disconnections,
            self.mean_at_reward,
            self.label_mismatch,
            self.ledger.up_kb() / e,
            self.ledger.down_kb() / e,
            self.ledger.total_kb() / e,
        )
    }
}

/// Line-record logs of an evaluation, episodes concatenated in seed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalLogs {
    pub trajectory: String,
    pub division: String,
    pub comm: String,
}

struct Digest {
    reward: f64,
    at: f64,
    collisions: usize,
    disconnections: usize,
    mismatches: usize,
    agent_steps: usize,
    ledger: OverheadLedger,
    trajectory: String,
    division: String,
    comm: String,
}

fn division_mode<'a>(tag: Baseline, nets: &BaselineNets<'a>) -> Result<DivisionMode<'a>> {
    Ok(match tag {
        Baseline::Ran => DivisionMode::Random,
        Baseline::Ce | Baseline::At => DivisionMode::Central,
        Baseline::Lf => DivisionMode::LeaderFollower,
        Baseline::Il | Baseline::Ia => DivisionMode::Decentralized(
            nets.division
                .ok_or_else(|| Error::input(format!("baseline {tag} needs a division policy")))?,
        ),
    })
}

fn strip_header(text: &str) -> &str {
    text.split_once('\n').map_or("", |(_, body)| body)
}

fn digest(ep: &Episode, cfg: &RunConfig, arch: Architecture) -> Result<Digest> {
    let world = &cfg.world;
    let comm = ep.comm_log(world.n_agents);
    let ledger = episode_report(&comm, &cfg.budget, cfg.invocation, arch)?;
    let traj = log::write_log(&ep.trajectory(world), world.n_agents);
    let mismatches = ep
        .steps
        .iter()
        .map(|s| s.choices.iter().zip(&s.central_labels).filter(|(a, b)| a != b).count())
        .sum();
    Ok(Digest {
        reward: ep.total_reward(),
        at: ep.mean_at_reward(),
        collisions: ep.collision_steps(&cfg.rewards),
        disconnections: ep.disconnection_steps(),
        mismatches,
        agent_steps: ep.steps.len() * world.n_agents,
        ledger,
        trajectory: strip_header(&traj).to_string(),
        division: strip_header(&ep.division_log(world)).to_string(),
        comm: strip_header(&comm.to_text()).to_string(),
    })
}

fn eval_seed(cfg: &RunConfig, e: usize) -> u64 {
    seed::derive(cfg.seed, "eval", e as u64)
}

/// Evaluates `tag` on `cfg.eval_episodes` seeded episodes with mean
/// actions. Episode `e` always uses the same seed, so baselines face the
/// same initial conditions. Episodes run on scoped worker threads; results
/// are merged in episode order and do not depend on the thread count.
pub fn run_baseline(tag: Baseline, cfg: &RunConfig, nets: BaselineNets<'_>) -> Result<(EvalSummary, EvalLogs)> {
    cfg.validate()?;
    let division = division_mode(tag, &nets)?;
    let arch = tag.architecture();
    let n = cfg.eval_episodes;
    let workers = thread::available_parallelism().map_or(1, |w| w.get()).min(n).max(1);
    let chunk = n.div_ceil(workers).max(1);
    let run_one = |e: usize| -> Result<Digest> {
        let ep = run_episode(&EpisodeSpec {
            world: &cfg.world,
            rewards: &cfg.rewards,
            division,
            policy: nets.student,
            actions: ActionMode::Mean,
            schedule: cfg.invocation,
            seed: eval_seed(cfg, e),
        })?;
        digest(&ep, cfg, arch)
    };
    let digests: Vec<Digest> = if workers == 1 {
        (0..n).map(run_one).collect::<Result<_>>()?
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|lo| {
                    let run_one = &run_one;
                    s.spawn(move || (lo..(lo + chunk).min(n)).map(run_one).collect::<Result<Vec<_>>>())
                })
                .collect();
            let mut all = Vec::with_capacity(n);
            for h in handles {
                all.extend(h.join().expect("evaluation worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };

    let mut summary = EvalSummary::empty(tag);
    let mut logs = EvalLogs {
        trajectory: log::header(cfg.world.n_agents) + "\n",
        division: format!(
            "# division n_agents={} n_patterns={}\n",
            cfg.world.n_agents,
            cfg.world.n_patterns()
        ),
        comm: format!("# comm n_agents={}\n", cfg.world.n_agents),
    };
    if digests.is_empty() {
        return Ok((summary, logs));
    }
    let mut agent_steps = 0;
    let mut mismatches = 0;
    for d in &digests {
        summary.mean_reward += d.reward;
        summary.mean_at_reward += d.at;
        summary.collisions += d.collisions;
        summary.disconnections += d.disconnections;
        summary.ledger.absorb(&d.ledger);
        agent_steps += d.agent_steps;
        mismatches += d.mismatches;
        logs.trajectory.push_str(&d.trajectory);
        logs.division.push_str(&d.division);
        logs.comm.push_str(&d.comm);
    }
    let e = digests.len() as f64;
    summary.episodes = digests.len();
    summary.mean_reward /= e;
    summary.mean_at_reward /= e;
    summary.label_mismatch = mismatches as f64 / agent_steps.max(1) as f64;
    Ok((summary, logs))
}

/// Adversary collisions and disconnections recovered from logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventCounts {
    pub collisions: usize,
    pub disconnections: usize,
}

/// Counts collision steps in a trajectory log (any agent closer than
/// `safe_distance` to the adversary) and disconnection steps in a division
/// log (any agent whose teammate precondition failed). A division-log step
/// starts at each agent-0 line.
pub fn event_metrics(trajectory: &str, division: &str, safe_distance: f64) -> Result<EventCounts> {
    let records: Vec<TrajectoryRecord> = log::parse_log(trajectory)?;
    let collisions = records
        .iter()
        .filter(|r| {
            let e = r.state.adversary.position;
            r.state.agents.iter().any(|a| a.position.distance(e) < safe_distance)
        })
        .count();

    let mut lines = division.lines().enumerate();
    let header = lines.next().map(|(_, h)| h).unwrap_or("");
    let n_patterns = header
        .strip_prefix("# division ")
        .and_then(|h| h.split_ascii_whitespace().find_map(|kv| kv.strip_prefix("n_patterns=")))
        .and_then(|c| c.parse::<usize>().ok())
        .ok_or(Error::Parse {
            line: 1,
            message: "missing `# division n_agents=<N> n_patterns=<C>` header".into(),
        })?;
    let mut disconnections = 0;
    let mut step_broken: Option<bool> = None;
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| Error::Parse { line: k + 1, message: m };
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.len() != 4 + n_patterns {
            return Err(err(format!("expected {} fields, found {}", 4 + n_patterns, fields.len())));
        }
        let agent: usize = fields[1].parse().map_err(|e| err(format!("agent `{}`: {e}", fields[1])))?;
        let ok = match fields[3 + n_patterns] {
            "0" => false,
            "1" => true,
            f => return Err(err(format!("precondition flag `{f}` is not 0 or 1"))),
        };
        if agent == 0 {
            disconnections += usize::from(step_broken == Some(true));
            step_broken = Some(false);
        }
        let broken = step_broken.get_or_insert(false);
        *broken |= !ok;
    }
    disconnections += usize::from(step_broken == Some(true));
    Ok(EventCounts {
        collisions,
        disconnections,
    })
}

/// Overhead of one architecture over a (possibly multi-episode) comm log.
/// Episodes are delimited by `t = 0`.
pub fn log_overhead(
    comm: &CommLog,
    budget: &LinkBudget,
    schedule: InvocationSchedule,
    arch: Architecture,
) -> Result<(OverheadLedger, usize)> {
    let episodes = comm.steps.iter().filter(|s| s.t == 0).count();
    Ok((episode_report(comm, budget, schedule, arch)?, episodes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIV_HEADER: &str = "# division n_agents=2 n_patterns=2\n";

    #[test]
    fn clean_division_log() {
        let text = format!("{DIV_HEADER}0 0 1 0 4 1\n0 1 1 0 4 1\n1 0 1 0 4 1\n1 1 1 0 4 1\n");
        let traj = log::header(2) + "\n";
        let c = event_metrics(&traj, &text, 0.5).unwrap();
        assert_eq!(c, EventCounts::default());
    }

    #[test]
    fn three_broken_steps() {
        let mut text = DIV_HEADER.to_string();
        for t in 0..5 {
            let ok = u8::from(!(1..4).contains(&t));
            text.push_str(&format!("{t} 0 0 1 2 1\n{t} 1 0 1 2 {ok}\n"));
        }
        let traj = log::header(2) + "\n";
        assert_eq!(event_metrics(&traj, &text, 0.5).unwrap().disconnections, 3);
    }

    #[test]
    fn malformed_line_number() {
        let text = format!("{DIV_HEADER}0 0 1 0 4 1\n0 1 1 0 4 x\n");
        let traj = log::header(2) + "\n";
        match event_metrics(&traj, &text, 0.5) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
