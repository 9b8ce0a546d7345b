//! Paths, point sets, and the geometric queries used by every matcher.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};

/// An ordered, non-empty sequence of 3D points in meters.
///
/// Timestamps are optional provenance; none of the matching code reads them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath", into = "RawPath")]
pub struct Path {
    points: Vec<Point3>,
    timestamps: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawPath {
    points: Vec<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamps: Option<Vec<f64>>,
}

impl TryFrom<RawPath> for Path {
    type Error = Error;

    fn try_from(raw: RawPath) -> Result<Self> {
        match raw.timestamps {
            Some(ts) => Path::with_timestamps(raw.points, ts),
            None => Path::new(raw.points),
        }
    }
}

impl From<Path> for RawPath {
    fn from(p: Path) -> Self {
        RawPath {
            points: p.points,
            timestamps: p.timestamps,
        }
    }
}

fn check_points(points: &[Point3]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyPath);
    }
    if let Some(index) = points.iter().position(|p| !geom::is_finite(p)) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

impl Path {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        check_points(&points)?;
        Ok(Path {
            points,
            timestamps: None,
        })
    }

    pub fn with_timestamps(points: Vec<Point3>, timestamps: Vec<f64>) -> Result<Self> {
        check_points(&points)?;
        if timestamps.len() != points.len() {
            return Err(Error::Timestamps(format!(
                "{} timestamps for {} points",
                timestamps.len(),
                points.len()
            )));
        }
        if timestamps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Timestamps("non-finite timestamp".into()));
        }
        if timestamps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Timestamps("not strictly increasing".into()));
        }
        Ok(Path {
            points,
            timestamps: Some(timestamps),
        })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &Point3 {
        &self.points[0]
    }

    pub fn last(&self) -> &Point3 {
        &self.points[self.points.len() - 1]
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    /// Appends a point. Any timestamps are discarded since the new point has none.
    pub fn push(&mut self, p: Point3) -> Result<()> {
        if !geom::is_finite(&p) {
            return Err(Error::NonFinite {
                index: self.points.len(),
            });
        }
        self.points.push(p);
        self.timestamps = None;
        Ok(())
    }

    /// Every point shifted by `offset`.
    pub fn translated(&self, offset: &Point3) -> Path {
        Path {
            points: self.points.iter().map(|p| geom::add(p, offset)).collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    /// Total polyline length.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| geom::dist(&w[0], &w[1])).sum()
    }
}

/// An unordered, non-empty collection of 3D points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point3>,
}

impl PointSet {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if let Some(index) = points.iter().position(|p| !geom::is_finite(p)) {
            return Err(Error::NonFinite { index });
        }
        Ok(PointSet { points })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }
}

/// Reverses the point order. Timestamps are dropped: reversed timing is not physical.
pub fn reverse_path(p: &Path) -> Path {
    let mut points = p.points.clone();
    points.reverse();
    Path {
        points,
        timestamps: None,
    }
}

/// The `n` points ending at index `t` (inclusive). Near the start of a path the
/// window is truncated to the available prefix instead of padded.
pub fn window(p: &Path, t: usize, n: usize) -> Result<Path> {
    window_slice(p.points(), t, n).map(|pts| Path {
        points: pts.to_vec(),
        timestamps: None,
    })
}

pub(crate) fn window_slice(points: &[Point3], t: usize, n: usize) -> Result<&[Point3]> {
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    if t >= points.len() {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: points.len(),
        });
    }
    let start = (t + 1).saturating_sub(n);
    Ok(&points[start..=t])
}

/// Index `i >= from_index` minimizing `|p[i] - q|`, smallest index on ties.
pub fn closest_point_index(p: &Path, q: &Point3, from_index: usize) -> Result<usize> {
    if from_index >= p.len() {
        return Err(Error::IndexOutOfRange {
            index: from_index,
            len: p.len(),
        });
    }
    Ok(closest_from(p.points(), q, from_index))
}

/// Caller guarantees `from < points.len()`.
#[inline]
pub(crate) fn closest_from(points: &[Point3], q: &Point3, from: usize) -> usize {
    let mut best = from;
    let mut best_d = geom::dist_sq(&points[from], q);
    for (i, pt) in points.iter().enumerate().skip(from + 1) {
        let d = geom::dist_sq(pt, q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Points `i..=j`.
pub fn extract_segment(p: &Path, i: usize, j: usize) -> Result<Path> {
    if i > j || j >= p.len() {
        return Err(Error::InvalidSegment {
            start: i,
            end: j,
            len: p.len(),
        });
    }
    Ok(Path {
        points: p.points[i..=j].to_vec(),
        timestamps: None,
    })
}

/// Symmetric mean of squared nearest-neighbour distances.
pub fn chamfer_distance(a: &PointSet, b: &PointSet) -> f64 {
    one_sided(a.points(), b.points()) + one_sided(b.points(), a.points())
}

fn one_sided(from: &[Point3], to: &[Point3]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| {
            to.iter()
                .map(|q| geom::dist_sq(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / from.len() as f64
}
