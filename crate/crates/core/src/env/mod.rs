//! Desk-scale kinematic insertion world.
//!
//! The socket is a plate whose top face sits `channel_depth` above the goal,
//! pierced by a vertical square channel. All geometry is expressed for the
//! plug centre, so `channel_half_width` is the lateral clearance the centre
//! has inside the channel. The goal is the centre of the channel floor.
//!
//! Collision is resolved by projection: a step that ends inside the solid is
//! pushed back onto the face it came from (top face when arriving from
//! above, channel walls and floor when already inside the channel).

mod controller;
mod demos;
mod experiment;

pub use controller::{greedy_controller, GreedyController, Scheme};
pub use demos::generate_disassembly_demos;
pub use experiment::{
    compare_schemes, compare_schemes_from, run_episode, ComparisonReport, EpisodeResult, SchemeSummary,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::path::Path;

/// Per-axis uniform bounds `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRanges {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

impl AxisRanges {
    pub const fn symmetric(x: f64, y: f64, z: f64) -> Self {
        AxisRanges {
            x: [-x, x],
            y: [-y, y],
            z: [-z, z],
        }
    }

    pub const fn zero() -> Self {
        AxisRanges::symmetric(0.0, 0.0, 0.0)
    }

    fn axes(&self) -> [[f64; 2]; 3] {
        [self.x, self.y, self.z]
    }

    fn validate(&self, name: &str) -> Result<()> {
        for (axis, [lo, hi]) in ["x", "y", "z"].iter().zip(self.axes()) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "env.{name}.{axis} must be finite with lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point3 {
        self.axes().map(|[lo, hi]| uniform(rng, lo, hi))
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.axes()
            .iter()
            .zip(p)
            .all(|([lo, hi], v)| *lo <= *v && *v <= *hi)
    }
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Lateral clearance of the plug centre inside the channel (m).
    pub channel_half_width: f64,
    pub channel_depth: f64,
    pub plug_radius: f64,
    /// Socket frame origin in world coordinates.
    pub socket_pose_ranges: AxisRanges,
    /// Channel axis position in the socket frame (x, y).
    pub channel_offset: [f64; 2],
    /// Initial plug position relative to the channel mouth (rim centre).
    pub plug_offset_ranges: AxisRanges,
    /// Additive noise on the observed socket position.
    pub obs_noise_ranges: AxisRanges,
    /// Yaw noise (degrees) on the observed socket frame; moves the observed
    /// goal in the plane through `channel_offset`.
    pub obs_yaw_noise_deg: [f64; 2],
    pub max_steps: usize,
    /// Maximum displacement per step (m).
    pub action_step: f64,
    pub success_tolerance: f64,
    /// Free-space poses the disassembly paths end at, relative to the rim centre.
    pub demo_free_space_ranges: AxisRanges,
    /// Height above the rim the retraction reaches before leaving the axis.
    pub demo_retract_clearance: f64,
    /// Point spacing of recorded disassembly paths inside the channel.
    pub demo_channel_spacing: f64,
    /// Point spacing of recorded disassembly paths in free space.
    pub demo_free_spacing: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            channel_half_width: 0.0005,
            channel_depth: 0.02,
            plug_radius: 0.004,
            socket_pose_ranges: AxisRanges {
                x: [0.40, 0.60],
                y: [-0.10, 0.10],
                z: [0.16, 0.18],
            },
            channel_offset: [0.01, 0.0],
            plug_offset_ranges: AxisRanges {
                x: [-0.010, 0.010],
                y: [-0.010, 0.010],
                z: [0.010, 0.020],
            },
            obs_noise_ranges: AxisRanges::symmetric(0.002, 0.002, 0.002),
            obs_yaw_noise_deg: [-5.0, 5.0],
            max_steps: 200,
            action_step: 0.001,
            success_tolerance: 0.002,
            demo_free_space_ranges: AxisRanges {
                x: [-0.012, 0.012],
                y: [-0.012, 0.012],
                z: [0.008, 0.022],
            },
            demo_retract_clearance: 0.001,
            demo_channel_spacing: 0.0005,
            demo_free_spacing: 0.0009,
        }
    }
}

impl EnvConfig {
    /// No randomization and no observation noise.
    pub fn noise_free(mut self) -> Self {
        self.obs_noise_ranges = AxisRanges::zero();
        self.obs_yaw_noise_deg = [0.0, 0.0];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("channel_half_width", self.channel_half_width),
            ("channel_depth", self.channel_depth),
            ("plug_radius", self.plug_radius),
            ("action_step", self.action_step),
            ("success_tolerance", self.success_tolerance),
            ("demo_channel_spacing", self.demo_channel_spacing),
            ("demo_free_spacing", self.demo_free_spacing),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("env.{name} must be positive, got {v}")));
            }
        }
        if !(self.demo_retract_clearance.is_finite() && self.demo_retract_clearance >= 0.0) {
            return Err(Error::InvalidConfig(
                "env.demo_retract_clearance must be non-negative".into(),
            ));
        }
        self.socket_pose_ranges.validate("socket_pose_ranges")?;
        self.plug_offset_ranges.validate("plug_offset_ranges")?;
        self.obs_noise_ranges.validate("obs_noise_ranges")?;
        self.demo_free_space_ranges.validate("demo_free_space_ranges")?;
        let [ylo, yhi] = self.obs_yaw_noise_deg;
        if !(ylo.is_finite() && yhi.is_finite() && ylo <= yhi) {
            return Err(Error::InvalidConfig("env.obs_yaw_noise_deg must satisfy lo <= hi".into()));
        }
        if !self.channel_offset.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("env.channel_offset must be finite".into()));
        }
        if self.demo_free_space_ranges.z[0] <= 0.0 {
            return Err(Error::InvalidConfig(
                "env.demo_free_space_ranges.z must lie above the rim".into(),
            ));
        }
        Ok(())
    }
}

/// Socket geometry in world coordinates, for the plug centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Socket {
    pub goal: Point3,
    pub x_bounds: [f64; 2],
    pub y_bounds: [f64; 2],
    pub rim_z: f64,
}

impl Socket {
    pub fn new(goal: Point3, half_width: f64, depth: f64) -> Self {
        Socket {
            goal,
            x_bounds: [goal[0] - half_width, goal[0] + half_width],
            y_bounds: [goal[1] - half_width, goal[1] + half_width],
            rim_z: goal[2] + depth,
        }
    }

    /// Centre of the channel mouth.
    pub fn rim_centre(&self) -> Point3 {
        [self.goal[0], self.goal[1], self.rim_z]
    }

    pub fn in_column(&self, p: &Point3) -> bool {
        self.x_bounds[0] <= p[0] && p[0] <= self.x_bounds[1] && self.y_bounds[0] <= p[1] && p[1] <= self.y_bounds[1]
    }

    pub fn is_free(&self, p: &Point3) -> bool {
        p[2] >= self.rim_z || (self.in_column(p) && p[2] >= self.goal[2])
    }

    /// Distance from `p` to the free region; zero when free.
    pub fn penetration(&self, p: &Point3) -> f64 {
        if self.is_free(p) {
            return 0.0;
        }
        let clamp = |v: f64, [lo, hi]: [f64; 2]| v.clamp(lo, hi);
        let column = [
            clamp(p[0], self.x_bounds),
            clamp(p[1], self.y_bounds),
            p[2].max(self.goal[2]),
        ];
        (self.rim_z - p[2]).min(geom::dist(p, &column))
    }

    /// Where a move from free position `from` towards `to` ends up.
    pub fn resolve(&self, from: &Point3, to: &Point3) -> Point3 {
        if self.is_free(to) {
            return *to;
        }
        if from[2] >= self.rim_z {
            if self.in_column(to) {
                [to[0], to[1], self.goal[2]]
            } else {
                [to[0], to[1], self.rim_z]
            }
        } else {
            [
                to[0].clamp(self.x_bounds[0], self.x_bounds[1]),
                to[1].clamp(self.y_bounds[0], self.y_bounds[1]),
                to[2].max(self.goal[2]),
            ]
        }
    }
}

/// Limits an action to `max_norm`.
pub fn clamp_action(action: &Point3, max_norm: f64) -> Point3 {
    let n = geom::norm(action);
    if n > max_norm {
        geom::scale(action, max_norm / n)
    } else {
        *action
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub plug_pos: Point3,
    /// Socket frame origin.
    pub socket_pos: Point3,
    /// True insertion goal.
    pub goal: Point3,
    /// Goal as seen through observation noise.
    pub observed_goal: Point3,
    pub socket: Socket,
    pub step_count: usize,
    pub max_steps: usize,
    pub action_step: f64,
    pub success_tolerance: f64,
    pub trace: Path,
    pub done: bool,
    pub success: bool,
}

impl EnvState {
    /// Builds a state with an explicit plug position and noise-free goal.
    pub fn at(cfg: &EnvConfig, socket_pos: Point3, plug_pos: Point3) -> Result<Self> {
        cfg.validate()?;
        let goal = geom::add(&socket_pos, &[cfg.channel_offset[0], cfg.channel_offset[1], 0.0]);
        Self::assemble(cfg, socket_pos, goal, goal, plug_pos)
    }

    fn assemble(cfg: &EnvConfig, socket_pos: Point3, goal: Point3, observed_goal: Point3, plug_pos: Point3) -> Result<Self> {
        let socket = Socket::new(goal, cfg.channel_half_width, cfg.channel_depth);
        if !socket.is_free(&plug_pos) {
            return Err(Error::Infeasible(format!(
                "plug initialized inside the socket at {plug_pos:?}"
            )));
        }
        let mut env = EnvState {
            plug_pos,
            socket_pos,
            goal,
            observed_goal,
            socket,
            step_count: 0,
            max_steps: cfg.max_steps,
            action_step: cfg.action_step,
            success_tolerance: cfg.success_tolerance,
            trace: Path::new(vec![plug_pos])?,
            done: false,
            success: false,
        };
        env.update_status();
        Ok(env)
    }

    pub fn goal_distance(&self) -> f64 {
        geom::dist(&self.plug_pos, &self.goal)
    }

    fn update_status(&mut self) {
        self.success = self.goal_distance() < self.success_tolerance;
        self.done = self.success || self.step_count >= self.max_steps;
    }

    /// Position the plug would reach under `action`, without moving it.
    pub fn preview(&self, action: &Point3) -> Point3 {
        let a = clamp_action(action, self.action_step);
        self.socket.resolve(&self.plug_pos, &geom::add(&self.plug_pos, &a))
    }

    pub fn step_mut(&mut self, action: &Point3) -> Result<()> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        if !geom::is_finite(action) {
            return Err(Error::NonFinite { index: 0 });
        }
        self.plug_pos = self.preview(action);
        self.trace.push(self.plug_pos)?;
        self.step_count += 1;
        self.update_status();
        Ok(())
    }
}

/// Applies one action and returns the successor state.
pub fn step(mut env: EnvState, action: &Point3) -> Result<EnvState> {
    env.step_mut(action)?;
    Ok(env)
}

/// Randomized initial state. Draw order: socket xyz, plug xyz, noise xyz, yaw.
pub fn make_env<R: Rng + ?Sized>(cfg: &EnvConfig, rng: &mut R) -> Result<EnvState> {
    make_env_with_height(cfg, None, rng)
}

/// As [`make_env`], with the plug height above the rim drawn by the caller
/// (the curriculum) instead of from `plug_offset_ranges.z`.
pub fn make_env_with_height<R: Rng + ?Sized>(cfg: &EnvConfig, height: Option<f64>, rng: &mut R) -> Result<EnvState> {
    cfg.validate()?;
    let socket_pos = cfg.socket_pose_ranges.sample(rng);
    let [ox, oy] = cfg.channel_offset;
    let goal = geom::add(&socket_pos, &[ox, oy, 0.0]);

    let mut offset = cfg.plug_offset_ranges.sample(rng);
    if let Some(h) = height {
        offset[2] = h;
    }
    let rim = [goal[0], goal[1], goal[2] + cfg.channel_depth];
    let plug_pos = geom::add(&rim, &offset);

    let noise = cfg.obs_noise_ranges.sample(rng);
    let yaw = uniform(rng, cfg.obs_yaw_noise_deg[0], cfg.obs_yaw_noise_deg[1]).to_radians();
    let (s, c) = yaw.sin_cos();
    let rotated = [c * ox - s * oy, s * ox + c * oy, 0.0];
    let observed_goal = geom::add(&geom::add(&socket_pos, &noise), &rotated);

    EnvState::assemble(cfg, socket_pos, goal, observed_goal, plug_pos)
}

/// Mixes a root seed with a stream index (SplitMix64 of `root + index`).
pub fn split_seed(root: u64, index: u64) -> u64 {
    let mut z = root.wrapping_add(index).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
