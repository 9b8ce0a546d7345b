//! Dynamic time warping: the exact table recurrence, a Sakoe-Chiba banded
//! variant, a soft-min relaxation, and the windowed imitation reward.
//!
//! All variants share one recurrence over a `(P+1) x (Q+1)` table with
//! `M[0][0] = 0` and every other border cell at `+inf`:
//!
//! ```text
//! M[i][j] = |a[i] - b[j]| + min(M[i-1][j], M[i][j-1], M[i-1][j-1])
//! ```

use rayon::prelude::*;

use crate::demo::DemoSet;
use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::path::{closest_from, Path};
use crate::reward::{argmax_first, squash};

#[derive(Debug, Clone, PartialEq)]
pub struct DtwResult {
    /// Sum of matched Euclidean distances (m).
    pub cost: f64,
    /// Matched `(i, j)` index pairs from `(0, 0)` to `(P-1, Q-1)`.
    pub alignment: Option<Vec<(usize, usize)>>,
}

/// Exact DTW with the backtraced alignment.
pub fn dtw_cost(a: &Path, b: &Path) -> DtwResult {
    let table = fill_table(a.points(), b.points(), |_, _| true);
    let alignment = backtrace(&table, a.len(), b.len());
    DtwResult {
        cost: table[a.len()][b.len()],
        alignment: Some(alignment),
    }
}

/// Cost-only DTW over two rolling rows.
///
/// Bit-identical to [`dtw_cost`]: the shorter sequence is laid along the row,
/// which transposes the table but leaves every cell value unchanged.
pub fn dtw_distance(a: &[Point3], b: &[Point3]) -> f64 {
    let (rows, cols) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let q = cols.len();
    let mut prev = vec![f64::INFINITY; q + 1];
    let mut cur = vec![f64::INFINITY; q + 1];
    prev[0] = 0.0;
    for r in rows {
        cur[0] = f64::INFINITY;
        for j in 1..=q {
            let d = geom::dist(r, &cols[j - 1]);
            cur[j] = d + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[q]
}

/// DTW restricted to cells with `|i*Q/P - j| <= band` (1-based indices).
///
/// The band is widened to `ceil(|Q - P| / min(P, Q))` when narrower, the
/// smallest width that keeps `(1, 1)` and `(P, Q)` connected.
pub fn dtw_cost_banded(a: &Path, b: &Path, band: usize) -> Result<DtwResult> {
    if band == 0 {
        return Err(Error::InvalidBand);
    }
    let (p, q) = (a.len(), b.len());
    let band = band.max(min_feasible_band(p, q));
    // |i*Q/P - j| <= band  <=>  |i*Q - j*P| <= band*P, in exact integer arithmetic.
    let allowed = |i: usize, j: usize| (i * q).abs_diff(j * p) <= band * p;
    let table = fill_table(a.points(), b.points(), allowed);
    let alignment = backtrace(&table, p, q);
    Ok(DtwResult {
        cost: table[p][q],
        alignment: Some(alignment),
    })
}

fn min_feasible_band(p: usize, q: usize) -> usize {
    let short = p.min(q);
    p.abs_diff(q).div_ceil(short).max(1)
}

fn fill_table(a: &[Point3], b: &[Point3], allowed: impl Fn(usize, usize) -> bool) -> Vec<Vec<f64>> {
    let (p, q) = (a.len(), b.len());
    let mut m = vec![vec![f64::INFINITY; q + 1]; p + 1];
    m[0][0] = 0.0;
    for i in 1..=p {
        for j in 1..=q {
            if !allowed(i, j) {
                continue;
            }
            let d = geom::dist(&a[i - 1], &b[j - 1]);
            m[i][j] = d + m[i - 1][j].min(m[i][j - 1]).min(m[i - 1][j - 1]);
        }
    }
    m
}

/// Walks back from `(P, Q)` choosing the cheapest predecessor; diagonal wins ties.
fn backtrace(m: &[Vec<f64>], p: usize, q: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(p + q);
    let (mut i, mut j) = (p, q);
    while i > 0 && j > 0 {
        out.push((i - 1, j - 1));
        if i == 1 && j == 1 {
            break;
        }
        let diag = m[i - 1][j - 1];
        let up = m[i - 1][j];
        let left = m[i][j - 1];
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out.reverse();
    out
}

/// `-gamma * ln(sum(exp(-x / gamma)))`, shifted by the minimum for stability.
fn soft_min3(x: [f64; 3], gamma: f64) -> f64 {
    let m = x[0].min(x[1]).min(x[2]);
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = x.iter().map(|&v| (-(v - m) / gamma).exp()).sum();
    m - gamma * s.ln()
}

/// DTW cost with `min` replaced by the soft-min at temperature `gamma`.
pub fn soft_dtw_cost(a: &Path, b: &Path, gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let (ap, bp) = (a.points(), b.points());
    let q = bp.len();
    let mut prev = vec![f64::INFINITY; q + 1];
    let mut cur = vec![f64::INFINITY; q + 1];
    prev[0] = 0.0;
    for r in ap {
        cur[0] = f64::INFINITY;
        for j in 1..=q {
            let d = geom::dist(r, &bp[j - 1]);
            cur[j] = d + soft_min3([prev[j], cur[j - 1], prev[j - 1]], gamma);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[q])
}

/// Details of one window-to-demo match.
#[derive(Debug, Clone, PartialEq)]
pub struct DtwMatch {
    pub reward: f64,
    pub cost: f64,
    /// Inclusive demo index range the window was matched against.
    pub segment: (usize, usize),
}

/// Segment bounds on `demo`: closest point to the window's first point, then
/// the closest subsequent point to its last point. A backwards match is
/// clamped to a single-point segment.
fn segment_bounds(window: &[Point3], demo: &[Point3]) -> (usize, usize) {
    let start = closest_from(demo, &window[0], 0);
    let end = closest_from(demo, &window[window.len() - 1], start);
    (start, end)
}

pub(crate) fn match_from(window: &[Point3], demo: &[Point3], start: usize) -> DtwMatch {
    let end = closest_from(demo, &window[window.len() - 1], start);
    let cost = dtw_distance(window, &demo[start..=end]);
    DtwMatch {
        reward: squash(cost),
        cost,
        segment: (start, end),
    }
}

/// Matches the end-effector window against the corresponding demo segment.
pub fn dtw_match(ee_window: &Path, demo: &Path) -> DtwMatch {
    let (start, _) = segment_bounds(ee_window.points(), demo.points());
    match_from(ee_window.points(), demo.points(), start)
}

/// `1 - tanh(C*)` between the window and its matched demo segment.
pub fn dtw_imitation_reward(ee_window: &Path, demo: &Path) -> f64 {
    dtw_match(ee_window, demo).reward
}

/// Maximum reward over all demos and the first demo attaining it.
pub fn batch_dtw_reward(ee_window: &Path, demos: &DemoSet) -> Result<(f64, usize)> {
    argmax_first(demos.paths().map(|d| dtw_imitation_reward(ee_window, d))).ok_or(Error::EmptyDemoSet)
}

/// Parallel [`batch_dtw_reward`]. Per-demo rewards are computed independently
/// and reduced in index order, so the result equals the sequential fold.
pub fn par_batch_dtw_reward(ee_window: &Path, demos: &DemoSet) -> Result<(f64, usize)> {
    let rewards: Vec<f64> = demos
        .demos()
        .par_iter()
        .map(|d| dtw_imitation_reward(ee_window, &d.path))
        .collect();
    argmax_first(rewards.into_iter()).ok_or(Error::EmptyDemoSet)
}
