//! Sampling-based curriculum over the initial plug height.
//!
//! Stage `k` of `K` samples heights uniformly from `[h_min(k), h_max]`. The
//! lower bound moves linearly from `h_min_initial` (stage 1, the full range)
//! to `h_min_final` (stage K); the upper bound never moves. A stage advances
//! once the success rate over a full trailing window exceeds the threshold.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumConfig {
    pub enabled: bool,
    pub num_stages: usize,
    pub h_min_initial: f64,
    pub h_min_final: f64,
    pub h_max: f64,
    pub window: usize,
    pub advance_threshold: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            enabled: true,
            num_stages: 4,
            h_min_initial: 0.010,
            h_min_final: 0.018,
            h_max: 0.020,
            window: 100,
            advance_threshold: 0.8,
        }
    }
}

impl CurriculumConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("curriculum: {m}")));
        if self.num_stages == 0 {
            return bad("num_stages must be at least 1");
        }
        if ![self.h_min_initial, self.h_min_final, self.h_max]
            .iter()
            .all(|h| h.is_finite())
        {
            return bad("heights must be finite");
        }
        if self.num_stages > 1 && self.h_min_final <= self.h_min_initial {
            return bad("h_min_final must exceed h_min_initial");
        }
        if self.h_min_final >= self.h_max || self.h_min_initial >= self.h_max {
            return bad("lower bounds must stay below h_max");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.advance_threshold) {
            return bad("advance_threshold must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    /// 1-based stage index.
    pub stage: usize,
    pub num_stages: usize,
    pub h_min_initial: f64,
    pub h_min_final: f64,
    pub h_max: f64,
    pub window: usize,
    pub advance_threshold: f64,
    pub trailing_successes: VecDeque<bool>,
}

impl CurriculumState {
    pub fn new(cfg: &CurriculumConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(CurriculumState {
            stage: 1,
            num_stages: cfg.num_stages,
            h_min_initial: cfg.h_min_initial,
            h_min_final: cfg.h_min_final,
            h_max: cfg.h_max,
            window: cfg.window,
            advance_threshold: cfg.advance_threshold,
            trailing_successes: VecDeque::with_capacity(cfg.window),
        })
    }

    /// Lower height bound of stage `k` (1-based).
    pub fn lower_bound_at(&self, k: usize) -> f64 {
        if self.num_stages == 1 {
            return self.h_min_initial;
        }
        let frac = (k - 1) as f64 / (self.num_stages - 1) as f64;
        self.h_min_initial + frac * (self.h_min_final - self.h_min_initial)
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound_at(self.stage)
    }

    pub fn success_rate(&self) -> Option<f64> {
        if self.trailing_successes.len() < self.window {
            return None;
        }
        let hits = self.trailing_successes.iter().filter(|&&s| s).count();
        Some(hits as f64 / self.window as f64)
    }
}

/// Uniform draw from the current stage's `[h_min(k), h_max]`.
pub fn sample_initial_height<R: Rng + ?Sized>(state: &CurriculumState, rng: &mut R) -> f64 {
    rng.random_range(state.lower_bound()..=state.h_max)
}

pub fn record_and_maybe_advance(mut state: CurriculumState, success: bool) -> CurriculumState {
    if state.trailing_successes.len() == state.window {
        state.trailing_successes.pop_front();
    }
    state.trailing_successes.push_back(success);
    if state.stage < state.num_stages {
        if let Some(rate) = state.success_rate() {
            if rate > state.advance_threshold {
                state.stage += 1;
                state.trailing_successes.clear();
            }
        }
    }
    state
}

/// Return weight `k / K`.
pub fn curriculum_weight(state: &CurriculumState) -> f64 {
    state.stage as f64 / state.num_stages as f64
}
