//! Discrete path signatures of 3D paths and the signature imitation reward.
//!
//! For a path `x[0..=N]` with increments `dx[k] = x[k+1] - x[k]`, level 1 is
//! `x[N] - x[0]` and level `m > 1` is accumulated as
//!
//! ```text
//! S_m(i1..im)[N] = sum_{k=0}^{N-1} S_{m-1}(i1..i(m-1))[k+1] * dx_im[k]
//! ```
//!
//! i.e. the running lower-level value *after* step `k` multiplies that step's
//! increment. For a single step `d` this makes level 2 the outer product
//! `d d^T`. Terms are flattened level by level, each level in lexicographic
//! multi-index order, after the constant leading 1.

use rayon::prelude::*;

use crate::demo::DemoSet;
use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::path::{closest_from, Path};
use crate::reward::{argmax_first, squash};

pub const DIM: usize = 3;

/// Number of flattened terms up to `level`, including the leading 1.
pub fn signature_len(level: usize) -> usize {
    (3usize.pow(level as u32 + 1) - 1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    level: usize,
    terms: Vec<f64>,
}

impl Signature {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    /// Terms of a single level (`0` is the constant).
    pub fn level_terms(&self, m: usize) -> &[f64] {
        let start = signature_len(m) - 3usize.pow(m as u32);
        &self.terms[start..signature_len(m)]
    }
}

/// Running signature of a growing path; `push` appends one point.
///
/// Pushing points one at a time performs exactly the same arithmetic as
/// [`signature`] on the whole path.
#[derive(Debug, Clone)]
pub struct SignatureAccumulator {
    start: Point3,
    last: Point3,
    level: usize,
    /// Flattened terms, same layout as [`Signature::terms`].
    terms: Vec<f64>,
}

impl SignatureAccumulator {
    pub fn new(start: Point3, level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidLevel);
        }
        let mut terms = vec![0.0; signature_len(level)];
        terms[0] = 1.0;
        Ok(SignatureAccumulator {
            start,
            last: start,
            level,
            terms,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn push(&mut self, p: &Point3) {
        let dx = geom::sub(p, &self.last);
        let lvl1 = geom::sub(p, &self.start);
        self.terms[1..4].copy_from_slice(&lvl1);
        // Level m reads level m-1 after it has absorbed this step.
        let mut lower_start = 1;
        let mut lower_len = DIM;
        for _ in 2..=self.level {
            let start = lower_start + lower_len;
            let (head, tail) = self.terms.split_at_mut(start);
            let lower = &head[lower_start..];
            for (w, &s) in lower.iter().enumerate() {
                let row = &mut tail[w * DIM..w * DIM + DIM];
                row[0] += s * dx[0];
                row[1] += s * dx[1];
                row[2] += s * dx[2];
            }
            lower_start = start;
            lower_len *= DIM;
        }
        self.last = *p;
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn to_signature(&self) -> Signature {
        Signature {
            level: self.level,
            terms: self.terms.clone(),
        }
    }
}

pub fn signature(p: &Path, level: usize) -> Result<Signature> {
    signature_of(p.points(), level)
}

pub(crate) fn signature_of(points: &[Point3], level: usize) -> Result<Signature> {
    let first = points.first().ok_or(Error::EmptyPath)?;
    let mut acc = SignatureAccumulator::new(*first, level)?;
    for p in &points[1..] {
        acc.push(p);
    }
    Ok(acc.to_signature())
}

/// Unweighted L2 distance over all terms.
pub fn signature_distance(s1: &Signature, s2: &Signature) -> Result<f64> {
    if s1.level != s2.level {
        return Err(Error::LevelMismatch(s1.level, s2.level));
    }
    Ok(terms_distance(&s1.terms, &s2.terms))
}

#[inline]
pub(crate) fn terms_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Compares the whole end-effector path with the demo prefix ending at the
/// demo point closest to the current end-effector position.
pub fn signature_imitation_reward(ee_path: &Path, demo: &Path, level: usize) -> Result<f64> {
    let ee = signature(ee_path, level)?;
    let end = closest_from(demo.points(), ee_path.last(), 0);
    let seg = signature_of(&demo.points()[..=end], level)?;
    Ok(squash(signature_distance(&ee, &seg)?))
}

pub fn batch_signature_reward(ee_path: &Path, demos: &DemoSet, level: usize) -> Result<(f64, usize)> {
    let rewards = demos
        .paths()
        .map(|d| signature_imitation_reward(ee_path, d, level))
        .collect::<Result<Vec<_>>>()?;
    argmax_first(rewards.into_iter()).ok_or(Error::EmptyDemoSet)
}

/// Parallel [`batch_signature_reward`] with an identical result.
pub fn par_batch_signature_reward(ee_path: &Path, demos: &DemoSet, level: usize) -> Result<(f64, usize)> {
    let rewards = demos
        .demos()
        .par_iter()
        .map(|d| signature_imitation_reward(ee_path, &d.path, level))
        .collect::<Result<Vec<_>>>()?;
    argmax_first(rewards.into_iter()).ok_or(Error::EmptyDemoSet)
}

/// Signatures of every prefix of every demo, for repeated reward queries
/// against the same demo set. Equal to recomputing from scratch.
#[derive(Debug, Clone)]
pub struct PrefixSignatures {
    level: usize,
    width: usize,
    /// Per demo: points and the flattened prefix signatures, one row per point.
    demos: Vec<(Vec<Point3>, Vec<f64>)>,
}

impl PrefixSignatures {
    pub fn new(demos: &DemoSet, level: usize) -> Result<Self> {
        let width = signature_len(level);
        let demos = demos
            .paths()
            .map(|p| {
                let pts = p.points().to_vec();
                let mut acc = SignatureAccumulator::new(pts[0], level)?;
                let mut rows = Vec::with_capacity(pts.len() * width);
                rows.extend_from_slice(acc.terms());
                for q in &pts[1..] {
                    acc.push(q);
                    rows.extend_from_slice(acc.terms());
                }
                Ok((pts, rows))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PrefixSignatures { level, width, demos })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Reward of one demo given the end-effector signature and current point.
    pub fn reward(&self, demo: usize, ee_terms: &[f64], ee_point: &Point3) -> f64 {
        let (pts, rows) = &self.demos[demo];
        let end = closest_from(pts, ee_point, 0);
        let seg = &rows[end * self.width..(end + 1) * self.width];
        squash(terms_distance(ee_terms, seg))
    }

    /// Max over demos with first-index tie-break.
    pub fn best(&self, ee_terms: &[f64], ee_point: &Point3) -> (f64, usize) {
        argmax_first((0..self.demos.len()).map(|i| self.reward(i, ee_terms, ee_point)))
            .expect("demo set is never empty")
    }
}
