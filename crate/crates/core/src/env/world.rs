use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AdversaryState, AgentState, GlobalState, Observation, WorldConfig};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Vec2};

/// Initial state for the configured seed.
pub fn reset(config: &WorldConfig) -> Result<GlobalState> {
    reset_seeded(config, config.rng_seed)
}

/// Agents on the largest pattern's offsets around the target-area centre
/// with uniform jitter; the adversary at a fixed distance on a random
/// bearing.
pub fn reset_seeded(config: &WorldConfig, seed: u64) -> Result<GlobalState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = config.spawn_jitter;
    let jitter = |rng: &mut ChaCha8Rng| {
        if j > 0.0 {
            rng.random_range(-j..=j)
        } else {
            0.0
        }
    };
    let agents = config.patterns[0]
        .offsets
        .iter()
        .map(|&o| AgentState {
            position: o + Vec2::new(jitter(&mut rng), jitter(&mut rng)),
            velocity: Vec2::ZERO,
        })
        .collect();
    let bearing = rng.random_range(0.0..std::f64::consts::TAU);
    let d = config.adversary_spawn_distance;
    Ok(GlobalState {
        agents,
        adversary: AdversaryState {
            position: Vec2::new(d * bearing.cos(), d * bearing.sin()),
            velocity: Vec2::ZERO,
        },
        step: 0,
    })
}

/// Advances one step with semi-implicit Euler: velocities integrate first
/// and are norm-clipped to the per-agent cap, positions use the new
/// velocity. The adversary moves with [`adversary_policy`] evaluated on the
/// pre-step state.
pub fn step(
    config: &WorldConfig,
    state: &GlobalState,
    accelerations: &[Vec2],
    active_caps: &[f64],
) -> Result<GlobalState> {
    let n = state.agents.len();
    if accelerations.len() != n || active_caps.len() != n {
        return Err(Error::input(format!(
            "expected {n} accelerations and caps, got {} and {}",
            accelerations.len(),
            active_caps.len()
        )));
    }
    if let Some(i) = accelerations.iter().position(|a| !a.is_finite()) {
        return Err(Error::input(format!("non-finite acceleration for agent {i}")));
    }
    let dt = config.dt;
    let agents = state
        .agents
        .iter()
        .zip(accelerations)
        .zip(active_caps)
        .map(|((s, &a), &cap)| {
            let velocity = (s.velocity + a * dt).clip_norm(cap);
            AgentState {
                position: s.position + velocity * dt,
                velocity,
            }
        })
        .collect();
    let ve = adversary_policy(config, state);
    Ok(GlobalState {
        agents,
        adversary: AdversaryState {
            position: state.adversary.position + ve * dt,
            velocity: ve,
        },
        step: state.step + 1,
    })
}

/// Pursuit toward the mean agent position at full adversary speed.
pub fn adversary_policy(config: &WorldConfig, state: &GlobalState) -> Vec2 {
    let Some(center) = centroid(state.agents.iter().map(|a| a.position)) else {
        return Vec2::ZERO;
    };
    let d = center - state.adversary.position;
    let dist = d.norm();
    if dist < 1e-6 {
        Vec2::ZERO
    } else {
        (d * (config.adversary_speed / dist)).clip_norm(config.adversary_speed)
    }
}

/// Agents strictly within communication range of `i`, ascending.
pub fn comm_neighbors(config: &WorldConfig, state: &GlobalState, i: usize) -> Vec<usize> {
    neighbors_within(state, i, config.comm_range)
}

pub(crate) fn neighbors_within(state: &GlobalState, i: usize, range: f64) -> Vec<usize> {
    let pi = state.agents[i].position;
    state
        .agents
        .iter()
        .enumerate()
        .filter(|&(j, a)| j != i && pi.distance(a.position) < range)
        .map(|(j, _)| j)
        .collect()
}

pub fn observe(config: &WorldConfig, state: &GlobalState, i: usize) -> Observation {
    observe_capped(state, i, config.comm_range, config.max_pattern())
}

/// Fills at most `max_pattern - 1` slots; on overflow the nearest
/// neighbours are kept (ties to the lower index), then laid out by index.
pub(crate) fn observe_capped(
    state: &GlobalState,
    i: usize,
    comm_range: f64,
    max_pattern: usize,
) -> Observation {
    let mut obs = Observation::empty(max_pattern);
    let me = &state.agents[i];
    obs.set_own(me, state.adversary.position);
    let mut nbrs = neighbors_within(state, i, comm_range);
    let capacity = max_pattern.saturating_sub(1);
    if nbrs.len() > capacity {
        nbrs.sort_by(|&a, &b| {
            let da = me.position.distance(state.agents[a].position);
            let db = me.position.distance(state.agents[b].position);
            da.total_cmp(&db).then(a.cmp(&b))
        });
        nbrs.truncate(capacity);
        nbrs.sort_unstable();
    }
    for (slot, &j) in nbrs.iter().enumerate() {
        obs.set_slot(slot, j, &state.agents[j]);
    }
    obs
}
