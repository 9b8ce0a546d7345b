//! Workloads shared by the kernel benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmatch::{generate_disassembly_demos, DemoSet, EnvConfig, Path};

/// Random walk of `len` points with steps in `[-step, step]^3`.
pub fn random_walk(len: usize, step: f64, seed: u64) -> Path {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = [0.0; 3];
    let pts = (0..len)
        .map(|_| {
            for v in &mut p {
                *v += rng.random_range(-step..=step);
            }
            p
        })
        .collect();
    Path::new(pts).expect("non-empty")
}

/// Generated demo set with the default environment.
pub fn demo_set(count: usize, seed: u64) -> DemoSet {
    generate_disassembly_demos(&EnvConfig::default(), "bench", count, seed).expect("valid config")
}

/// A query window taken from the middle of the first demo, slightly offset.
pub fn query_window(demos: &DemoSet, len: usize) -> Path {
    let pts = demos.demos()[0].path.points();
    let start = pts.len().saturating_sub(len) / 2;
    let end = (start + len).min(pts.len());
    Path::new(pts[start..end].iter().map(|p| [p[0] + 2e-4, p[1] - 1e-4, p[2]]).collect()).expect("non-empty")
}
