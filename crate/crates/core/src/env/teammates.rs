use crate::env::WorldConfig;
use crate::error::{Error, Result};

/// Per-pattern teammate sets. Groups are contiguous index blocks: for a
/// pattern of size `c`, agent `i` belongs to block `i / c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TeammateMatrix {
    n_agents: usize,
    sizes: Vec<usize>,
}

impl TeammateMatrix {
    pub fn new(config: &WorldConfig) -> Self {
        TeammateMatrix {
            n_agents: config.n_agents,
            sizes: config.pattern_sizes(),
        }
    }

    pub fn n_patterns(&self) -> usize {
        self.sizes.len()
    }

    pub fn pattern_size(&self, pattern: usize) -> usize {
        self.sizes[pattern]
    }

    pub fn block(&self, pattern: usize, agent: usize) -> usize {
        agent / self.sizes[pattern]
    }

    /// All members of `agent`'s block, including `agent`.
    pub fn members(&self, pattern: usize, agent: usize) -> std::ops::Range<usize> {
        let c = self.sizes[pattern];
        let start = (agent / c) * c;
        start..start + c
    }

    /// The `c - 1` teammates of `agent` under `pattern`, ascending.
    pub fn teammates(&self, pattern: usize, agent: usize) -> Vec<usize> {
        self.members(pattern, agent).filter(|&j| j != agent).collect()
    }

    /// Bitmask row `m_i^c` of length `n_agents`.
    pub fn row_mask(&self, pattern: usize, agent: usize) -> Vec<bool> {
        let m = self.members(pattern, agent);
        (0..self.n_agents).map(|j| j != agent && m.contains(&j)).collect()
    }
}

/// One group of agents sharing a chosen pattern and block.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub pattern: usize,
    pub block: usize,
    pub members: Vec<usize>,
}

impl Group {
    /// Whether every member of the pattern block agreed on the pattern.
    pub fn is_complete(&self, teammates: &TeammateMatrix) -> bool {
        self.members.len() == teammates.pattern_size(self.pattern)
    }
}

/// Partition of the swarm induced by the per-agent pattern choices. Agents
/// that picked the same pattern and fall in the same block form one group;
/// when neighbours disagree a block can be left partially filled.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    pub choices: Vec<usize>,
    pub groups: Vec<Group>,
}

impl Grouping {
    pub fn from_choices(choices: &[usize], teammates: &TeammateMatrix) -> Result<Self> {
        if choices.len() != teammates.n_agents {
            return Err(Error::input(format!(
                "{} pattern choices for {} agents",
                choices.len(),
                teammates.n_agents
            )));
        }
        let mut groups: Vec<Group> = Vec::new();
        for (i, &c) in choices.iter().enumerate() {
            if c >= teammates.n_patterns() {
                return Err(Error::input(format!("pattern index {c} out of range")));
            }
            let block = teammates.block(c, i);
            match groups.iter_mut().find(|g| g.pattern == c && g.block == block) {
                Some(g) => g.members.push(i),
                None => groups.push(Group {
                    pattern: c,
                    block,
                    members: vec![i],
                }),
            }
        }
        Ok(Grouping {
            choices: choices.to_vec(),
            groups,
        })
    }

    pub fn uniform(pattern: usize, teammates: &TeammateMatrix) -> Self {
        Self::from_choices(&vec![pattern; teammates.n_agents], teammates)
            .expect("uniform choice is always in range")
    }

    pub fn group_of(&self, agent: usize) -> &Group {
        self.groups
            .iter()
            .find(|g| g.members.contains(&agent))
            .expect("grouping tiles the swarm")
    }
}
