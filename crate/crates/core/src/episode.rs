//! Closed-loop episode simulation: division control picks a pattern per
//! agent, the low-level policy acts on the reshaped observation, the world
//! advances and rewards are scored.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::comm::{CommLog, CommStep, InvocationSchedule};
use crate::division::{
    aggregate_importance, central_division, determine_pattern, exchange_confidence,
    infer_confidence, leader_follower_division, reshape_observation, ConfidenceVector,
    SafetyIntervals, StaleCache,
};
use crate::env::{
    self, log::TrajectoryRecord, GlobalState, Grouping, TeammateMatrix, WorldConfig,
};
use crate::error::Result;
use crate::geometry::Vec2;
use crate::nn::Network;
use crate::rewards::{at_reward, group_centers, total_reward, RewardBreakdown, RewardParams};
use crate::seed;

/// Source of the per-agent pattern choice.
#[derive(Debug, Clone, Copy)]
pub enum DivisionMode<'a> {
    /// Every agent holds the given pattern index.
    Fixed(usize),
    /// Uniform random one-hot instruction per agent and step.
    Random,
    /// Centralized interval rule over global positions.
    Central,
    /// Interval rule evaluated by agent 0 from follower reports.
    LeaderFollower,
    /// Learned confidence, neighbour exchange, column sum and argmax.
    Decentralized(&'a Network),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    Sample,
    Mean,
}

#[derive(Debug, Clone, Copy)]
pub struct EpisodeSpec<'a> {
    pub world: &'a WorldConfig,
    pub rewards: &'a RewardParams,
    pub division: DivisionMode<'a>,
    pub policy: &'a Network,
    pub actions: ActionMode,
    pub schedule: InvocationSchedule,
    /// Episode seed; drives the reset and every stochastic choice.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub state: GlobalState,
    /// Padded local observations `o_i`.
    pub observations: Vec<Vec<f64>>,
    /// Reshaped low-level inputs `h'_i`.
    pub policy_inputs: Vec<Vec<f64>>,
    /// Raw policy outputs (sampled or mean).
    pub actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub accelerations: Vec<Vec2>,
    pub choices: Vec<usize>,
    /// Division confidence each agent acted on (one-hot for rule-based
    /// modes). Empty when control was not invoked this step.
    pub confidences: Vec<Vec<f64>>,
    /// Central rule's pattern per agent at this step.
    pub central_labels: Vec<usize>,
    pub precondition_ok: Vec<bool>,
    pub degrees: Vec<usize>,
    pub invoked: bool,
    pub boundary_crossed: bool,
    pub reward: RewardBreakdown,
    pub at_reward: f64,
    pub next_state: GlobalState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub steps: Vec<StepRecord>,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward.total).sum()
    }

    pub fn mean_at_reward(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.at_reward).sum::<f64>() / self.steps.len() as f64
    }

    pub fn collision_steps(&self, params: &RewardParams) -> usize {
        self.steps
            .iter()
            .filter(|s| {
                let e = s.next_state.adversary.position;
                s.next_state
                    .agents
                    .iter()
                    .any(|a| a.position.distance(e) < params.safe_distance)
            })
            .count()
    }

    pub fn disconnection_steps(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.precondition_ok.iter().any(|ok| !ok))
            .count()
    }

    pub fn trajectory(&self, world: &WorldConfig) -> Vec<TrajectoryRecord> {
        self.steps
            .iter()
            .map(|s| TrajectoryRecord {
                state: s.next_state.clone(),
                actions: s.accelerations.clone(),
                pattern_sizes: s.choices.iter().map(|&c| world.patterns[c].size).collect(),
                reward: s.reward,
                at_reward: s.at_reward,
            })
            .collect()
    }

    pub fn comm_log(&self, n_agents: usize) -> CommLog {
        CommLog {
            n_agents,
            steps: self
                .steps
                .iter()
                .map(|s| CommStep {
                    t: s.t,
                    boundary_crossed: s.boundary_crossed,
                    degrees: s.degrees.clone(),
                })
                .collect(),
        }
    }

    /// Division-event log: `t i z_0 … z_{C-1} c_sharp precondition_ok` per
    /// agent and step, pattern given by size.
    pub fn division_log(&self, world: &WorldConfig) -> String {
        let c = world.n_patterns();
        let mut out = format!("# division n_agents={} n_patterns={c}\n", world.n_agents);
        for s in &self.steps {
            for i in 0..s.choices.len() {
                out.push_str(&format!("{} {}", s.t, i));
                let z = s.confidences.get(i).filter(|z| !z.is_empty());
                for k in 0..c {
                    let v = z.map_or(f64::NAN, |z| z[k]);
                    out.push_str(&format!(" {v:.6}"));
                }
                out.push_str(&format!(
                    " {} {}\n",
                    world.patterns[s.choices[i]].size,
                    u8::from(s.precondition_ok[i])
                ));
            }
        }
        out
    }
}

pub fn run_episode(spec: &EpisodeSpec<'_>) -> Result<Episode> {
    let world = spec.world;
    let n = world.n_agents;
    let n_patterns = world.n_patterns();
    let sizes = world.pattern_sizes();
    let teammates = TeammateMatrix::new(world);
    let intervals = SafetyIntervals::from_patterns(&world.patterns)?;
    let mut state = env::reset_seeded(world, spec.seed)?;
    let mut act_rng: ChaCha8Rng = seed::rng(spec.seed, "actions", 0);
    let mut division_rng: ChaCha8Rng = seed::rng(spec.seed, "division", 0);
    let mut cache = StaleCache::new(&state);

    let initial = match spec.division {
        DivisionMode::Fixed(c) => c,
        _ => 0,
    };
    let mut choices = vec![initial; n];
    let mut grouping = Grouping::uniform(initial, &teammates);
    let mut prev_central: Option<Vec<usize>> = None;
    let bound = spec.policy.spec.action_bound;
    let mut steps = Vec::with_capacity(world.episode_len);

    for t in 0..world.episode_len {
        let neighbors: Vec<Vec<usize>> = (0..n).map(|i| env::comm_neighbors(world, &state, i)).collect();
        let degrees: Vec<usize> = neighbors.iter().map(Vec::len).collect();
        let observations: Vec<Vec<f64>> = (0..n).map(|i| env::observe(world, &state, i).features).collect();
        let central: Vec<usize> = central_division(world, &state, &grouping, &intervals)
            .iter()
            .map(ConfidenceVector::argmax)
            .collect();
        let boundary_crossed = prev_central.as_ref().is_some_and(|p| *p != central);
        let invoked = spec.schedule.invoked(t, boundary_crossed);

        let mut confidences = Vec::new();
        if invoked {
            match spec.division {
                DivisionMode::Fixed(c) => choices = vec![c; n],
                DivisionMode::Random => {
                    choices = (0..n).map(|_| division_rng.random_range(0..n_patterns)).collect();
                    confidences = choices.iter().map(|&c| ConfidenceVector::label(c, n_patterns).0).collect();
                }
                DivisionMode::Central => {
                    choices = central.clone();
                    confidences = choices.iter().map(|&c| ConfidenceVector::label(c, n_patterns).0).collect();
                }
                DivisionMode::LeaderFollower => {
                    let gathered: Vec<Option<Vec2>> = state.agents.iter().map(|a| Some(a.position)).collect();
                    let labels = leader_follower_division(world, &gathered, state.adversary.position, &grouping, &intervals);
                    for (i, z) in labels.iter().enumerate() {
                        if let Some(z) = z {
                            choices[i] = z.argmax();
                        }
                    }
                    confidences = choices.iter().map(|&c| ConfidenceVector::label(c, n_patterns).0).collect();
                }
                DivisionMode::Decentralized(pi_f) => {
                    let z: Vec<ConfidenceVector> = observations
                        .iter()
                        .map(|o| infer_confidence(pi_f, o))
                        .collect::<Result<_>>()?;
                    let (enhanced, _) = exchange_confidence(&z, &neighbors);
                    choices = enhanced
                        .iter()
                        .map(|e| determine_pattern(&aggregate_importance(e), &sizes))
                        .collect();
                    confidences = z.into_iter().map(|z| z.0).collect();
                }
            }
        }
        prev_central = Some(central.clone());
        grouping = Grouping::from_choices(&choices, &teammates)?;

        let mut policy_inputs = Vec::with_capacity(n);
        let mut precondition_ok = Vec::with_capacity(n);
        for i in 0..n {
            let r = reshape_observation(
                &state,
                i,
                &neighbors[i],
                &teammates.teammates(choices[i], i),
                &mut cache,
                world.max_pattern(),
            );
            policy_inputs.push(r.observation.features);
            precondition_ok.push(r.precondition_ok);
        }

        let mut actions = Vec::with_capacity(n);
        let mut log_probs = Vec::with_capacity(n);
        for input in &policy_inputs {
            match spec.actions {
                ActionMode::Sample => {
                    let (a, lp) = spec.policy.sample_action(input, &mut act_rng)?;
                    actions.push(a);
                    log_probs.push(lp);
                }
                ActionMode::Mean => {
                    let a = spec.policy.forward(input)?;
                    log_probs.push(spec.policy.log_prob(input, &a)?);
                    actions.push(a);
                }
            }
        }
        let accelerations: Vec<Vec2> = actions
            .iter()
            .map(|a| Vec2::new(a[0].clamp(-bound, bound), a[1].clamp(-bound, bound)))
            .collect();
        let caps: Vec<f64> = choices.iter().map(|&c| world.patterns[c].speed_cap).collect();
        let next_state = env::step(world, &state, &accelerations, &caps)?;
        let reward = total_reward(world, &next_state, &grouping, spec.rewards);
        let at = at_reward(&group_centers(&next_state, &grouping));

        steps.push(StepRecord {
            t,
            state: state.clone(),
            observations,
            policy_inputs,
            actions,
            log_probs,
            accelerations,
            choices: choices.clone(),
            confidences,
            central_labels: central,
            precondition_ok,
            degrees,
            invoked,
            boundary_crossed,
            reward,
            at_reward: at,
            next_state: next_state.clone(),
        });
        state = next_state;
    }
    Ok(Episode { steps })
}
