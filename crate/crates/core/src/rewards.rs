//! Scalar reward signals: formation error via Hausdorff distance, the
//! target-area penalty, the evasion penalty, their sum, and the inter-group
//! distance reward used while fine-tuning.

use serde::{Deserialize, Serialize};

use crate::env::{FormationPattern, GlobalState, Grouping, WorldConfig};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub k_formation: f64,
    pub k_area: f64,
    pub k_evasion: f64,
    /// Formation tolerance in meters; errors below it are free.
    pub formation_tolerance: f64,
    /// Exponent rate of the area penalty, 1/m.
    pub area_rate: f64,
    /// Agent-adversary distance below which a collision is counted.
    pub safe_distance: f64,
    pub target_radius: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            k_formation: 1.0,
            k_area: 0.3,
            k_evasion: 20.0,
            formation_tolerance: 0.75,
            area_rate: 0.5,
            safe_distance: 0.5,
            target_radius: 8.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        let coeffs = [
            self.k_formation,
            self.k_area,
            self.k_evasion,
            self.formation_tolerance,
            self.area_rate,
        ];
        if coeffs.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::config("reward coefficients must be non-negative"));
        }
        if !(self.safe_distance > 0.0) || !(self.target_radius > 0.0) {
            return Err(Error::config("safe_distance and target_radius must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub formation: f64,
    pub area: f64,
    pub evasion: f64,
    pub total: f64,
}

fn directed_hausdorff(from: &[Vec2], to: &[Vec2]) -> f64 {
    from.iter()
        .map(|x| to.iter().map(|y| x.distance(*y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two non-empty point sets.
pub fn hausdorff_distance(p: &[Vec2], f: &[Vec2]) -> Result<f64> {
    if p.is_empty() || f.is_empty() {
        return Err(Error::input("Hausdorff distance of an empty point set"));
    }
    Ok(directed_hausdorff(p, f).max(directed_hausdorff(f, p)))
}

fn recentered(positions: &[Vec2]) -> Vec<Vec2> {
    let c = centroid(positions.iter().copied()).unwrap_or(Vec2::ZERO);
    positions.iter().map(|p| *p - c).collect()
}

fn formation_penalty(positions: &[Vec2], pattern: &FormationPattern, params: &RewardParams) -> f64 {
    let p = recentered(positions);
    let d = directed_hausdorff(&p, &pattern.offsets).max(directed_hausdorff(&pattern.offsets, &p));
    -params.k_formation * (d - params.formation_tolerance).max(0.0)
}

/// Formation penalty of one complete group. Positions are re-centred on
/// their mean first, so the value is translation invariant but not
/// rotation invariant.
pub fn formation_reward(
    positions: &[Vec2],
    pattern: &FormationPattern,
    params: &RewardParams,
) -> Result<f64> {
    if positions.len() != pattern.size {
        return Err(Error::input(format!(
            "group of {} agents scored against pattern of size {}",
            positions.len(),
            pattern.size
        )));
    }
    Ok(formation_penalty(positions, pattern, params))
}

pub fn area_reward(positions: &[Vec2], params: &RewardParams) -> f64 {
    positions
        .iter()
        .map(|p| p.norm())
        .filter(|&d| d > params.target_radius)
        .map(|d| -params.k_area * (params.area_rate * d).exp())
        .sum()
}

pub fn evasion_reward(positions: &[Vec2], adversary: Vec2, params: &RewardParams) -> f64 {
    let hits = positions
        .iter()
        .filter(|p| p.distance(adversary) < params.safe_distance)
        .count();
    -params.k_evasion * hits as f64
}

/// Sum of the per-group formation penalties, the area penalty and the
/// evasion penalty. Groups left incomplete by disagreeing agents are scored
/// against their pattern's full offset set.
pub fn total_reward(
    config: &WorldConfig,
    state: &GlobalState,
    grouping: &Grouping,
    params: &RewardParams,
) -> RewardBreakdown {
    let positions = state.positions();
    let formation = grouping
        .groups
        .iter()
        .map(|g| {
            let pts: Vec<Vec2> = g.members.iter().map(|&i| positions[i]).collect();
            formation_penalty(&pts, &config.patterns[g.pattern], params)
        })
        .sum::<f64>();
    let area = area_reward(&positions, params);
    let evasion = evasion_reward(&positions, state.adversary.position, params);
    RewardBreakdown {
        formation,
        area,
        evasion,
        total: formation + area + evasion,
    }
}

pub fn group_centers(state: &GlobalState, grouping: &Grouping) -> Vec<Vec2> {
    grouping
        .groups
        .iter()
        .map(|g| {
            centroid(g.members.iter().map(|&i| state.agents[i].position))
                .expect("groups are non-empty")
        })
        .collect()
}

/// Negative sum of distances between group centres over unordered pairs.
pub fn at_reward(centers: &[Vec2]) -> f64 {
    let mut sum = 0.0;
    for (k, a) in centers.iter().enumerate() {
        for b in &centers[k + 1..] {
            sum += a.distance(*b);
        }
    }
    -sum
}
