use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AdversaryState {
    pub position: Vec2,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalState {
    pub agents: Vec<AgentState>,
    pub adversary: AdversaryState,
    pub step: usize,
}

impl GlobalState {
    pub fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.position).collect()
    }

    /// Critic input: every agent's position and velocity followed by the
    /// adversary's.
    pub fn to_features(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.agents.len() + 4);
        for a in &self.agents {
            out.extend_from_slice(&[a.position.x, a.position.y, a.velocity.x, a.velocity.y]);
        }
        let e = &self.adversary;
        out.extend_from_slice(&[e.position.x, e.position.y, e.velocity.x, e.velocity.y]);
        out
    }
}

/// Fixed-width local observation: own block `(p_i, v_i, p_e)` followed by
/// `max_pattern - 1` neighbor slots of `(p_j, v_j)`. Unused slots are zero
/// and their mask bit is clear.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub features: Vec<f64>,
    pub mask: Vec<bool>,
    /// Agent index occupying each slot.
    pub slots: Vec<Option<usize>>,
}

pub const OWN_WIDTH: usize = 6;
pub const SLOT_WIDTH: usize = 4;

pub fn observation_width(max_pattern: usize) -> usize {
    OWN_WIDTH + SLOT_WIDTH * max_pattern.saturating_sub(1)
}

impl Observation {
    pub fn empty(max_pattern: usize) -> Self {
        let slots = max_pattern.saturating_sub(1);
        Observation {
            features: vec![0.0; observation_width(max_pattern)],
            mask: vec![false; slots],
            slots: vec![None; slots],
        }
    }

    pub fn set_own(&mut self, own: &AgentState, adversary: Vec2) {
        self.features[..OWN_WIDTH].copy_from_slice(&[
            own.position.x,
            own.position.y,
            own.velocity.x,
            own.velocity.y,
            adversary.x,
            adversary.y,
        ]);
    }

    pub fn set_slot(&mut self, slot: usize, agent: usize, state: &AgentState) {
        let at = OWN_WIDTH + SLOT_WIDTH * slot;
        self.features[at..at + SLOT_WIDTH].copy_from_slice(&[
            state.position.x,
            state.position.y,
            state.velocity.x,
            state.velocity.y,
        ]);
        self.mask[slot] = true;
        self.slots[slot] = Some(agent);
    }

    pub fn slot_features(&self, slot: usize) -> &[f64] {
        let at = OWN_WIDTH + SLOT_WIDTH * slot;
        &self.features[at..at + SLOT_WIDTH]
    }

    pub fn valid_slots(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}
