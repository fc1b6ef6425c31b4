use serde::{Deserialize, Serialize};

use crate::env::{FormationPattern, GlobalState, Grouping, WorldConfig};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Vec2};

/// Division confidence over the configured patterns, in pattern order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfidenceVector(pub Vec<f64>);

impl ConfidenceVector {
    /// One-hot instruction selecting `pattern`.
    pub fn label(pattern: usize, n_patterns: usize) -> Self {
        let mut v = vec![0.0; n_patterns];
        v[pattern] = 1.0;
        ConfidenceVector(v)
    }

    pub fn is_label(&self) -> bool {
        self.0.iter().filter(|v| **v == 1.0).count() == 1
            && self.0.iter().all(|v| *v == 0.0 || *v == 1.0)
    }

    pub fn is_simplex(&self) -> bool {
        self.0.iter().all(|v| *v > 0.0 && *v < 1.0) && (self.0.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }

    /// Index of the largest entry; ties go to the lower index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.0.iter().enumerate() {
            if *v > self.0[best] {
                best = k;
            }
        }
        best
    }
}

/// Left-closed, right-open adversary-distance intervals, one per pattern,
/// jointly partitioning `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyIntervals {
    /// `(lower bound, upper bound, pattern index)` sorted by lower bound.
    bands: Vec<(f64, Option<f64>, usize)>,
}

impl SafetyIntervals {
    pub fn from_patterns(patterns: &[FormationPattern]) -> Result<Self> {
        let mut bands: Vec<(f64, Option<f64>, usize)> = patterns
            .iter()
            .enumerate()
            .map(|(k, p)| (p.safety_min, p.safety_max, k))
            .collect();
        bands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let bad = |m: String| Err(Error::Config(format!("safety intervals: {m}")));
        if bands.first().map(|b| b.0) != Some(0.0) {
            return bad("the lowest interval must start at 0".into());
        }
        for w in bands.windows(2) {
            match w[0].1 {
                Some(hi) if hi == w[1].0 && hi > w[0].0 => {}
                _ => return bad(format!("gap or overlap at {}", w[1].0)),
            }
        }
        let last = bands.last().expect("non-empty");
        if last.1.is_some() {
            return bad("the highest interval must be unbounded".into());
        }
        Ok(SafetyIntervals { bands })
    }

    /// Pattern whose interval contains `beta`.
    pub fn select(&self, beta: f64) -> usize {
        let beta = beta.max(0.0);
        self.bands
            .iter()
            .find(|(lo, hi, _)| *lo <= beta && hi.is_none_or(|h| beta < h))
            .map(|b| b.2)
            .expect("intervals partition [0, inf)")
    }
}

/// Distance between a group's centre and the adversary.
pub fn group_beta(positions: impl IntoIterator<Item = Vec2>, adversary: Vec2) -> Option<f64> {
    centroid(positions.into_iter().map(|p| p - adversary)).map(Vec2::norm)
}

/// Centralized rule: each agent is labelled with the pattern whose interval
/// contains the distance from its current group's centre to the adversary.
pub fn central_division(
    config: &WorldConfig,
    state: &GlobalState,
    grouping: &Grouping,
    intervals: &SafetyIntervals,
) -> Vec<ConfidenceVector> {
    let c = config.n_patterns();
    let mut labels = vec![ConfidenceVector(Vec::new()); state.agents.len()];
    for g in &grouping.groups {
        let beta = group_beta(
            g.members.iter().map(|&j| state.agents[j].position),
            state.adversary.position,
        )
        .expect("groups are non-empty");
        let pattern = intervals.select(beta);
        for &i in &g.members {
            labels[i] = ConfidenceVector::label(pattern, c);
        }
    }
    labels
}

/// Leader-follower rule evaluated by the leader from the follower positions
/// it has gathered (`None` when a follower's report did not arrive) and its
/// own sensing of the adversary. Agents without a known position receive no
/// instruction.
pub fn leader_follower_division(
    config: &WorldConfig,
    gathered: &[Option<Vec2>],
    adversary: Vec2,
    grouping: &Grouping,
    intervals: &SafetyIntervals,
) -> Vec<Option<ConfidenceVector>> {
    let c = config.n_patterns();
    let mut out = vec![None; gathered.len()];
    for g in &grouping.groups {
        let known: Vec<Vec2> = g.members.iter().filter_map(|&j| gathered[j]).collect();
        let Some(beta) = group_beta(known, adversary) else {
            continue;
        };
        let pattern = intervals.select(beta);
        for &i in &g.members {
            if gathered[i].is_some() {
                out[i] = Some(ConfidenceVector::label(pattern, c));
            }
        }
    }
    out
}
