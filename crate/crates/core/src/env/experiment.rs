use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_disassembly_demos, make_env_with_height, split_seed, EnvConfig, GreedyController, Scheme};
use crate::config::ExperimentConfig;
use crate::curriculum::{curriculum_weight, record_and_maybe_advance, sample_initial_height, CurriculumState};
use crate::demo::DemoSet;
use crate::error::Result;
use crate::path::Path;
use crate::reward::{distance_to_goal_reward, horizon_return, RewardConfig, StepRecord};

/// Stream index reserved for the shared demo set.
const DEMO_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    pub steps_taken: usize,
    pub trace: Path,
    pub return_value: f64,
}

/// Runs one episode. `demos` are in the goal frame and are translated onto
/// the true goal; the shaped return uses the true goal as well, while the
/// controller only sees the observed goal.
pub fn run_episode<R: Rng + ?Sized>(
    cfg: &EnvConfig,
    demos: &DemoSet,
    scheme: Scheme,
    reward_cfg: &RewardConfig,
    curriculum: &CurriculumState,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let height = sample_initial_height(curriculum, rng);
    let mut env = make_env_with_height(cfg, Some(height), rng)?;
    let world = demos.translated(&env.goal);
    let mut controller = GreedyController::new(&world, scheme, reward_cfg)?;
    let mut steps = Vec::with_capacity(cfg.max_steps);
    while !env.done {
        let (action, imitation) = controller.act(&env, rng)?;
        env.step_mut(&action)?;
        steps.push(StepRecord {
            baseline_reward: distance_to_goal_reward(&env.plug_pos, &env.goal, reward_cfg),
            imitation_reward: imitation,
            plug_goal_distance: env.goal_distance(),
        });
    }
    let return_value = if steps.is_empty() {
        0.0
    } else {
        horizon_return(&steps, curriculum_weight(curriculum), reward_cfg)?
    };
    Ok(EpisodeResult {
        success: env.success,
        steps_taken: env.step_count,
        trace: env.trace,
        return_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
    pub mean_return: f64,
    pub final_stage: usize,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<SchemeSummary>,
    /// Curriculum state of each scheme after its last episode.
    pub curricula: BTreeMap<Scheme, CurriculumState>,
}

impl ComparisonReport {
    pub fn row(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }

    pub fn success_rate(&self, scheme: Scheme) -> Option<f64> {
        self.row(scheme).map(|r| r.success_rate)
    }

    pub const CSV_HEADER: &'static str = "scheme,episodes,successes,success_rate,mean_steps,mean_return,wall_ms";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{:.2},{:.4},{}",
                r.scheme, r.episodes, r.successes, r.success_rate, r.mean_steps, r.mean_return, r.wall_ms
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<10} {:>8} {:>9} {:>8} {:>10} {:>11} {:>6} {:>9}\n",
            "scheme", "episodes", "successes", "rate", "mean_steps", "mean_return", "stage", "wall_ms"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>9} {:>7.1}% {:>10.1} {:>11.3} {:>6} {:>9}",
                r.scheme.as_str(),
                r.episodes,
                r.successes,
                100.0 * r.success_rate,
                r.mean_steps,
                r.mean_return,
                r.final_stage,
                r.wall_ms
            );
        }
        out
    }
}

/// Runs every configured scheme over the same episode seeds from fresh curricula.
pub fn compare_schemes(exp: &ExperimentConfig) -> Result<ComparisonReport> {
    compare_schemes_from(exp, &BTreeMap::new())
}

/// As [`compare_schemes`], resuming each scheme's curriculum from `initial`
/// where present.
///
/// Episode `i` uses the generator seeded with `split_seed(root_seed, i)` for
/// every scheme. Episodes run in blocks of one curriculum window; a block
/// sees the curriculum state at its start and its outcomes are recorded in
/// episode order, so results do not depend on thread count.
pub fn compare_schemes_from(
    exp: &ExperimentConfig,
    initial: &BTreeMap<Scheme, CurriculumState>,
) -> Result<ComparisonReport> {
    exp.validate()?;
    let demos = generate_disassembly_demos(
        &exp.env,
        &exp.assembly_id,
        exp.demo_count,
        split_seed(exp.root_seed, DEMO_STREAM),
    )?;
    let fresh = CurriculumState::new(&exp.curriculum)?;
    let block = exp.curriculum.window.max(1);

    let mut rows = Vec::with_capacity(exp.schemes.len());
    let mut curricula = BTreeMap::new();
    for &scheme in &exp.schemes {
        let started = Instant::now();
        let mut state = initial.get(&scheme).cloned().unwrap_or_else(|| fresh.clone());
        let (mut successes, mut steps, mut ret) = (0usize, 0usize, 0.0f64);
        let mut first = 0;
        while first < exp.episodes_per_scheme {
            let last = (first + block).min(exp.episodes_per_scheme);
            let snapshot = &state;
            let results = (first..last)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(exp.root_seed, i as u64));
                    run_episode(&exp.env, &demos, scheme, &exp.reward, snapshot, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            for r in &results {
                successes += usize::from(r.success);
                steps += r.steps_taken;
                ret += r.return_value;
            }
            if exp.curriculum.enabled {
                for r in &results {
                    state = record_and_maybe_advance(state, r.success);
                }
            }
            first = last;
        }
        let n = exp.episodes_per_scheme.max(1) as f64;
        rows.push(SchemeSummary {
            scheme,
            episodes: exp.episodes_per_scheme,
            successes,
            success_rate: successes as f64 / n,
            mean_steps: steps as f64 / n,
            mean_return: ret / n,
            final_stage: state.stage,
            wall_ms: started.elapsed().as_millis(),
        });
        curricula.insert(scheme, state);
    }
    Ok(ComparisonReport { rows, curricula })
}
