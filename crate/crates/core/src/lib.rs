//! Trajectory matching against reversed-disassembly demonstrations.
//!
//! Dynamic time warping and path signatures score how well an end-effector
//! path follows a set of demonstrations. The scores feed an imitation reward
//! that is combined with a goal-distance reward, a success bonus and a
//! sampling-based curriculum over initial plug heights. A kinematic
//! peg-in-channel world with a greedy controller compares the schemes.

pub mod config;
pub mod curriculum;
pub mod demo;
pub mod dtw;
pub mod env;
pub mod error;
pub mod geom;
pub mod io;
pub mod path;
pub mod reward;
pub mod signature;

pub use config::{ExperimentConfig, OutputConfig};
pub use curriculum::{
    curriculum_weight, record_and_maybe_advance, sample_initial_height, CurriculumConfig, CurriculumState,
};
pub use demo::{Demo, DemoSet, DemoSource};
pub use dtw::{
    batch_dtw_reward, dtw_cost, dtw_cost_banded, dtw_distance, dtw_imitation_reward, dtw_match, par_batch_dtw_reward,
    soft_dtw_cost, DtwMatch, DtwResult,
};
pub use env::{
    compare_schemes, generate_disassembly_demos, greedy_controller, make_env, run_episode, step, AxisRanges,
    ComparisonReport, EnvConfig, EnvState, EpisodeResult, Scheme,
};
pub use error::{Error, Result};
pub use geom::Point3;
pub use path::{chamfer_distance, closest_point_index, extract_segment, reverse_path, window, Path, PointSet};
pub use reward::{
    distance_to_goal_reward, horizon_return, imitation_reward_max, squash, state_based_reward, success_bonus,
    total_step_reward, RewardConfig, StepRecord,
};
pub use signature::{
    batch_signature_reward, par_batch_signature_reward, signature, signature_distance, signature_imitation_reward,
    signature_len, PrefixSignatures, Signature, SignatureAccumulator,
};
