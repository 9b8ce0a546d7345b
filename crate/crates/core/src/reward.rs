//! Reward composition: per-step weighting, max over demonstrations, the
//! state-based baseline, the distance-to-goal term, and the horizon return.

use serde::{Deserialize, Serialize};

use crate::demo::DemoSet;
use crate::error::{Error, Result};
use crate::geom::{self, Point3};

/// `1 - tanh(x)`, evaluated as `2 / (1 + e^{2x})` so that it stays positive
/// for large costs instead of rounding to zero. Floored at the smallest
/// positive normal once `exp` underflows (x > ~350).
pub fn squash(x: f64) -> f64 {
    let v = if x >= 0.0 {
        let e = (-2.0 * x).exp();
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + (2.0 * x).exp())
    };
    v.max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Weight of the baseline term in the per-step reward.
    pub omega_b: f64,
    /// Weight of the imitation term (per-step reward and horizon return).
    pub omega_i: f64,
    /// Weight of the distance-to-goal term in the horizon return.
    pub omega_sdf: f64,
    /// Constant stand-in for the interpenetration weighting.
    pub sapu_weight: f64,
    pub success_bonus: f64,
    /// Translational distance (m) below which an episode counts as solved.
    pub success_threshold: f64,
    pub signature_level: usize,
    /// Scale `k` (1/m) of the distance-to-goal squash.
    pub distance_scale: f64,
    /// DTW window length in steps.
    pub dtw_window: usize,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            omega_b: 1.0,
            omega_i: 1.0,
            omega_sdf: 1.0,
            sapu_weight: 1.0,
            success_bonus: 10.0,
            success_threshold: 0.002,
            signature_level: 3,
            distance_scale: 10.0,
            dtw_window: 10,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("omega_b", self.omega_b),
            ("omega_i", self.omega_i),
            ("omega_sdf", self.omega_sdf),
            ("success_bonus", self.success_bonus),
            ("distance_scale", self.distance_scale),
        ];
        for (name, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "reward.{name} must be finite and non-negative, got {w}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.sapu_weight) {
            return Err(Error::InvalidConfig(format!(
                "reward.sapu_weight must lie in [0, 1], got {}",
                self.sapu_weight
            )));
        }
        if !(self.success_threshold.is_finite() && self.success_threshold > 0.0) {
            return Err(Error::InvalidConfig(
                "reward.success_threshold must be positive".into(),
            ));
        }
        if self.signature_level == 0 {
            return Err(Error::InvalidConfig(
                "reward.signature_level must be at least 1".into(),
            ));
        }
        if self.dtw_window == 0 {
            return Err(Error::InvalidConfig(
                "reward.dtw_window must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One timestep of an episode as seen by the return computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub baseline_reward: f64,
    pub imitation_reward: f64,
    pub plug_goal_distance: f64,
}

/// Maximum and its first index.
pub fn imitation_reward_max(per_demo: &[f64]) -> Result<(f64, usize)> {
    argmax_first(per_demo.iter().copied()).ok_or(Error::EmptyInput)
}

/// Sequential max fold with smallest-index tie-break. `NaN` never wins.
pub(crate) fn argmax_first(values: impl Iterator<Item = f64>) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((b, _)) if !(v > b || (b.is_nan() && !v.is_nan())) => {}
            _ => best = Some((v, i)),
        }
    }
    best
}

pub fn total_step_reward(baseline: f64, imitation: f64, cfg: &RewardConfig) -> f64 {
    cfg.omega_b * baseline + cfg.omega_i * imitation
}

/// `1 - tanh(k * |plug - goal|)` with `k = cfg.distance_scale`.
pub fn distance_to_goal_reward(plug: &Point3, goal: &Point3, cfg: &RewardConfig) -> f64 {
    squash(cfg.distance_scale * geom::dist(plug, goal))
}

/// Shortest distance from `ee` to any point of any demonstration.
pub fn nearest_demo_distance(ee: &Point3, demos: &DemoSet) -> f64 {
    demos
        .paths()
        .flat_map(|p| p.points().iter())
        .map(|q| geom::dist_sq(ee, q))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// State-based matching: squashed distance to the closest demo point.
pub fn state_based_reward(ee: &Point3, demos: &DemoSet) -> Result<f64> {
    if demos.is_empty() {
        return Err(Error::EmptyDemoSet);
    }
    Ok(squash(nearest_demo_distance(ee, demos)))
}

/// Pays `cfg.success_bonus` if the distance ever dropped below the threshold.
pub fn success_bonus(step_distances: &[f64], cfg: &RewardConfig) -> Result<f64> {
    if step_distances.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hit = step_distances.iter().any(|&d| d < cfg.success_threshold);
    Ok(if hit { cfg.success_bonus } else { 0.0 })
}

/// Curriculum-weighted sum of weighted step rewards plus the success bonus.
pub fn horizon_return(steps: &[StepRecord], curriculum_weight: f64, cfg: &RewardConfig) -> Result<f64> {
    if steps.is_empty() {
        return Err(Error::EmptyInput);
    }
    let shaped: f64 = steps
        .iter()
        .map(|s| cfg.sapu_weight * (cfg.omega_sdf * s.baseline_reward + cfg.omega_i * s.imitation_reward))
        .sum();
    let distances: Vec<f64> = steps.iter().map(|s| s.plug_goal_distance).collect();
    Ok(curriculum_weight * shaped + success_bonus(&distances, cfg)?)
}
