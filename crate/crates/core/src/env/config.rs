use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// A target formation: `size` relative offsets, the speed cap agents obey
/// while holding it, and the adversary-distance interval `[safety_min,
/// safety_max)` in which the central rule selects it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationPattern {
    pub size: usize,
    pub offsets: Vec<Vec2>,
    pub speed_cap: f64,
    pub safety_min: f64,
    /// `None` stands for an unbounded interval.
    pub safety_max: Option<f64>,
}

impl FormationPattern {
    /// Regular polygon of `size` vertices on a circle of `radius` around the
    /// origin, first vertex on the positive x axis. A single agent sits at
    /// the origin.
    pub fn regular(size: usize, radius: f64, speed_cap: f64, safety: (f64, Option<f64>)) -> Self {
        let offsets = if size == 1 {
            vec![Vec2::ZERO]
        } else {
            (0..size)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / size as f64;
                    Vec2::new(radius * a.cos(), radius * a.sin())
                })
                .collect()
        };
        FormationPattern {
            size,
            offsets,
            speed_cap,
            safety_min: safety.0,
            safety_max: safety.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub n_agents: usize,
    /// Ordered from the largest pattern (fully united) to the smallest.
    pub patterns: Vec<FormationPattern>,
    pub comm_range: f64,
    pub target_radius: f64,
    pub episode_len: usize,
    pub dt: f64,
    pub adversary_speed: f64,
    pub spawn_jitter: f64,
    pub adversary_spawn_distance: f64,
    pub rng_seed: u64,
}

impl WorldConfig {
    /// Eight agents switching between an octagon (slow, far from the
    /// adversary) and two squares (fast, adversary within 2.8 m).
    pub fn full() -> Self {
        WorldConfig {
            n_agents: 8,
            patterns: vec![
                FormationPattern::regular(8, 1.0, 0.5, (2.8, None)),
                FormationPattern::regular(4, 1.0, 1.2, (0.0, Some(2.8))),
            ],
            comm_range: 2.0,
            target_radius: 8.0,
            episode_len: 200,
            dt: 1.0,
            adversary_speed: 0.6,
            spawn_jitter: 0.1,
            adversary_spawn_distance: 5.0,
            rng_seed: 0,
        }
    }

    /// Four agents switching between a square and two pairs, 100 steps.
    pub fn desk() -> Self {
        WorldConfig {
            n_agents: 4,
            patterns: vec![
                FormationPattern::regular(4, 0.9, 0.5, (2.8, None)),
                FormationPattern::regular(2, 0.9, 1.2, (0.0, Some(2.8))),
            ],
            episode_len: 100,
            ..WorldConfig::full()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patterns.is_empty() {
            return Err(Error::config("at least one formation pattern is required"));
        }
        let largest = self.patterns.iter().map(|p| p.size).max().unwrap_or(0);
        if self.n_agents == 0 || self.n_agents != largest {
            return Err(Error::config(format!(
                "n_agents ({}) must equal the largest pattern size ({largest})",
                self.n_agents
            )));
        }
        for w in self.patterns.windows(2) {
            if w[0].size <= w[1].size {
                return Err(Error::config(
                    "patterns must be listed by strictly decreasing size",
                ));
            }
        }
        for p in &self.patterns {
            if p.size == 0 || !self.n_agents.is_multiple_of(p.size) {
                return Err(Error::config(format!(
                    "pattern size {} does not divide n_agents {}",
                    p.size, self.n_agents
                )));
            }
            if p.offsets.len() != p.size {
                return Err(Error::config(format!(
                    "pattern {} carries {} offsets",
                    p.size,
                    p.offsets.len()
                )));
            }
            if !(p.speed_cap > 0.0) {
                return Err(Error::config("speed caps must be positive"));
            }
        }
        if !(self.comm_range > 0.0) || !(self.dt > 0.0) || !(self.adversary_speed > 0.0) {
            return Err(Error::config(
                "comm_range, dt and adversary_speed must be positive",
            ));
        }
        if !(self.target_radius > 0.0) || self.episode_len == 0 {
            return Err(Error::config("target_radius and episode_len must be positive"));
        }
        crate::division::SafetyIntervals::from_patterns(&self.patterns)?;
        Ok(())
    }

    /// Largest pattern size; fixes the observation width.
    pub fn max_pattern(&self) -> usize {
        self.patterns.first().map_or(0, |p| p.size)
    }

    pub fn n_patterns(&self) -> usize {
        self.patterns.len()
    }

    pub fn pattern_sizes(&self) -> Vec<usize> {
        self.patterns.iter().map(|p| p.size).collect()
    }

    pub fn pattern_index(&self, size: usize) -> Option<usize> {
        self.patterns.iter().position(|p| p.size == size)
    }

    pub fn observation_width(&self) -> usize {
        super::observation_width(self.max_pattern())
    }

    pub fn state_width(&self) -> usize {
        4 * self.n_agents + 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_desk_presets_validate() {
        WorldConfig::full().validate().unwrap();
        WorldConfig::desk().validate().unwrap();
    }

    #[test]
    fn non_dividing_pattern_rejected() {
        let mut cfg = WorldConfig::full();
        cfg.patterns[1] = FormationPattern::regular(3, 1.0, 1.2, (0.0, Some(2.8)));
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn nonpositive_range_rejected() {
        let mut cfg = WorldConfig::full();
        cfg.comm_range = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = WorldConfig::full();
        cfg.dt = -0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn regular_polygon_on_circle() {
        let p = FormationPattern::regular(8, 1.0, 0.5, (0.0, None));
        for o in &p.offsets {
            assert!((o.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(FormationPattern::regular(1, 1.0, 1.0, (0.0, None)).offsets, vec![Vec2::ZERO]);
    }
}
