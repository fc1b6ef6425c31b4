use super::ConfidenceVector;
use crate::env::{AgentState, GlobalState, Observation};

/// Own confidence followed by one row per neighbour, neighbours ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedConfidence {
    pub rows: Vec<Vec<f64>>,
    /// Agent that produced each row; `sources[0]` is the owner.
    pub sources: Vec<usize>,
}

/// Every agent broadcasts its confidence to its neighbours. Returns each
/// agent's received matrix and the number of point-to-point deliveries.
pub fn exchange_confidence(
    confidences: &[ConfidenceVector],
    neighbors: &[Vec<usize>],
) -> (Vec<EnhancedConfidence>, usize) {
    let mut deliveries = 0;
    let out = confidences
        .iter()
        .enumerate()
        .map(|(i, own)| {
            let mut nbrs = neighbors[i].clone();
            nbrs.sort_unstable();
            deliveries += nbrs.len();
            let mut rows = Vec::with_capacity(nbrs.len() + 1);
            let mut sources = Vec::with_capacity(nbrs.len() + 1);
            rows.push(own.0.clone());
            sources.push(i);
            for j in nbrs {
                rows.push(confidences[j].0.clone());
                sources.push(j);
            }
            EnhancedConfidence { rows, sources }
        })
        .collect();
    (out, deliveries)
}

/// Column sums of the enhanced confidence matrix.
pub fn aggregate_importance(enhanced: &EnhancedConfidence) -> Vec<f64> {
    let width = enhanced.rows.first().map_or(0, Vec::len);
    let mut phi = vec![0.0; width];
    for row in &enhanced.rows {
        for (p, v) in phi.iter_mut().zip(row) {
            *p += v;
        }
    }
    phi
}

/// Argmax of the importance vector; exact ties go to the larger pattern.
pub fn determine_pattern(importance: &[f64], pattern_sizes: &[usize]) -> usize {
    let mut best = 0;
    for k in 1..importance.len() {
        let better = importance[k] > importance[best]
            || (importance[k] == importance[best] && pattern_sizes[k] > pattern_sizes[best]);
        if better {
            best = k;
        }
    }
    best
}

/// Last-known state of every agent as seen by every other agent.
#[derive(Debug, Clone, PartialEq)]
pub struct StaleCache {
    known: Vec<Vec<AgentState>>,
}

impl StaleCache {
    /// Every agent starts with the full initial state.
    pub fn new(initial: &GlobalState) -> Self {
        StaleCache {
            known: vec![initial.agents.clone(); initial.agents.len()],
        }
    }

    pub fn get(&self, observer: usize, agent: usize) -> &AgentState {
        &self.known[observer][agent]
    }

    pub fn refresh(&mut self, observer: usize, state: &GlobalState, neighbors: &[usize]) {
        for &j in neighbors {
            self.known[observer][j] = state.agents[j];
        }
    }
}

/// Result of reshaping one agent's observation to its chosen teammates.
#[derive(Debug, Clone, PartialEq)]
pub struct Reshaped {
    pub observation: Observation,
    /// Whether every teammate was within communication range.
    pub precondition_ok: bool,
    /// Teammates outside range, filled from the stale cache.
    pub missing: Vec<usize>,
}

/// Low-level policy input for agent `i`: its own block followed by its
/// teammates under the chosen pattern, ascending, zero-padded. Teammates
/// outside `neighbors` are filled from the cache and reported.
pub fn reshape_observation(
    state: &GlobalState,
    i: usize,
    neighbors: &[usize],
    teammates: &[usize],
    cache: &mut StaleCache,
    max_pattern: usize,
) -> Reshaped {
    cache.refresh(i, state, neighbors);
    let mut observation = Observation::empty(max_pattern);
    observation.set_own(&state.agents[i], state.adversary.position);
    let mut missing = Vec::new();
    for (slot, &j) in teammates.iter().enumerate() {
        if !neighbors.contains(&j) {
            missing.push(j);
        }
        observation.set_slot(slot, j, cache.get(i, j));
    }
    Reshaped {
        observation,
        precondition_ok: missing.is_empty(),
        missing,
    }
}
