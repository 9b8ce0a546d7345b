use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{clamp_action, uniform, EnvState};
use crate::demo::DemoSet;
use crate::dtw::match_from;
use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::path::closest_from;
use crate::reward::{argmax_first, distance_to_goal_reward, squash, total_step_reward, RewardConfig};
use crate::signature::{PrefixSignatures, SignatureAccumulator};

/// Imitation term added to the goal-distance reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    None,
    State,
    Dtw,
    Signature,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::None, Scheme::State, Scheme::Dtw, Scheme::Signature];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::State => "state",
            Scheme::Dtw => "dtw",
            Scheme::Signature => "signature",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}` (expected none, state, dtw or signature)")))
    }
}

const JITTER: f64 = 0.1;

/// One-step lookahead policy: scores a fixed candidate set by the shaped
/// reward of the position each candidate leads to and picks the best.
///
/// Candidates are the goal-directed step towards the observed goal followed
/// by the 27 lattice directions `{-1,0,1}^3` (normalized, jittered). Ties go
/// to the earliest candidate. Every call draws the same number of random
/// values whatever the scheme.
#[derive(Debug, Clone)]
pub struct GreedyController {
    scheme: Scheme,
    cfg: RewardConfig,
    demo_points: Vec<Vec<Point3>>,
    state_points: Vec<Point3>,
    prefix: Option<PrefixSignatures>,
    acc: Option<SignatureAccumulator>,
    synced: usize,
}

impl GreedyController {
    /// `demos` must already be in world coordinates.
    pub fn new(demos: &DemoSet, scheme: Scheme, cfg: &RewardConfig) -> Result<Self> {
        cfg.validate()?;
        let demo_points: Vec<Vec<Point3>> = demos.paths().map(|p| p.points().to_vec()).collect();
        let state_points = if scheme == Scheme::State {
            demo_points.iter().flatten().copied().collect()
        } else {
            Vec::new()
        };
        let prefix = if scheme == Scheme::Signature {
            Some(PrefixSignatures::new(demos, cfg.signature_level)?)
        } else {
            None
        };
        Ok(GreedyController {
            scheme,
            cfg: cfg.clone(),
            demo_points,
            state_points,
            prefix,
            acc: None,
            synced: 0,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn sync_signature(&mut self, env: &EnvState) -> Result<()> {
        let pts = env.trace.points();
        if self.acc.is_none() || self.synced > pts.len() {
            self.acc = Some(SignatureAccumulator::new(pts[0], self.cfg.signature_level)?);
            self.synced = 1;
        }
        let acc = self.acc.as_mut().expect("initialized");
        for p in &pts[self.synced..] {
            acc.push(p);
        }
        self.synced = pts.len();
        Ok(())
    }

    fn candidates<R: Rng + ?Sized>(env: &EnvState, rng: &mut R) -> Vec<Point3> {
        let step = env.action_step;
        let mut out = Vec::with_capacity(28);
        let to_goal = geom::sub(&env.observed_goal, &env.plug_pos);
        out.push(clamp_action(&to_goal, step));
        for dx in [-1.0, 0.0, 1.0] {
            for dy in [-1.0, 0.0, 1.0] {
                for dz in [-1.0, 0.0, 1.0] {
                    let d: Point3 = [dx, dy, dz];
                    let n = geom::norm(&d);
                    let base = if n > 0.0 { geom::scale(&d, step / n) } else { d };
                    let jitter = [(); 3].map(|_| uniform(rng, -JITTER, JITTER) * step);
                    out.push(clamp_action(&geom::add(&base, &jitter), step));
                }
            }
        }
        out
    }

    /// Chosen action and the imitation reward of the position it leads to.
    pub fn act<R: Rng + ?Sized>(&mut self, env: &EnvState, rng: &mut R) -> Result<(Point3, f64)> {
        if env.done {
            return Err(Error::EpisodeFinished);
        }
        let candidates = Self::candidates(env, rng);
        let nexts: Vec<Point3> = candidates.iter().map(|a| env.preview(a)).collect();
        let imitation = self.imitation_scores(env, &nexts)?;
        let scores = nexts
            .iter()
            .zip(&imitation)
            .map(|(n, &im)| total_step_reward(distance_to_goal_reward(n, &env.observed_goal, &self.cfg), im, &self.cfg));
        let (_, best) = argmax_first(scores).expect("candidate set is never empty");
        Ok((candidates[best], imitation[best]))
    }

    fn imitation_scores(&mut self, env: &EnvState, nexts: &[Point3]) -> Result<Vec<f64>> {
        Ok(match self.scheme {
            Scheme::None => vec![0.0; nexts.len()],
            Scheme::State => nexts
                .iter()
                .map(|n| {
                    let d2 = self
                        .state_points
                        .iter()
                        .map(|q| geom::dist_sq(n, q))
                        .fold(f64::INFINITY, f64::min);
                    squash(d2.sqrt())
                })
                .collect(),
            Scheme::Dtw => {
                let pts = env.trace.points();
                let keep = self.cfg.dtw_window.saturating_sub(1).min(pts.len());
                let mut window = pts[pts.len() - keep..].to_vec();
                window.push([0.0; 3]);
                let starts: Option<Vec<usize>> =
                    (keep > 0).then(|| self.demo_points.iter().map(|d| closest_from(d, &window[0], 0)).collect());
                nexts
                    .iter()
                    .map(|n| {
                        *window.last_mut().expect("non-empty") = *n;
                        let per_demo = self.demo_points.iter().enumerate().map(|(i, d)| {
                            let start = match &starts {
                                Some(s) => s[i],
                                None => closest_from(d, n, 0),
                            };
                            match_from(&window, d, start).reward
                        });
                        argmax_first(per_demo).map_or(0.0, |(v, _)| v)
                    })
                    .collect()
            }
            Scheme::Signature => {
                self.sync_signature(env)?;
                let acc = self.acc.as_ref().expect("synced");
                let prefix = self.prefix.as_ref().expect("signature scheme");
                nexts
                    .iter()
                    .map(|n| {
                        let mut a = acc.clone();
                        a.push(n);
                        prefix.best(a.terms(), n).0
                    })
                    .collect()
            }
        })
    }
}

/// Stateless form of [`GreedyController::act`]; `demos` in world coordinates.
pub fn greedy_controller<R: Rng + ?Sized>(
    env: &EnvState,
    demos: &DemoSet,
    scheme: Scheme,
    cfg: &RewardConfig,
    rng: &mut R,
) -> Result<Point3> {
    GreedyController::new(demos, scheme, cfg)?.act(env, rng).map(|(a, _)| a)
}
