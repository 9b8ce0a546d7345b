use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{split_seed, EnvConfig};
use crate::demo::{Demo, DemoSet, DemoSource};
use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::path::{reverse_path, Path};

/// Appends points from the last point of `pts` to `to`, no farther than
/// `spacing` apart, ending exactly at `to`.
fn extend_line(pts: &mut Vec<Point3>, to: Point3, spacing: f64) {
    let from = *pts.last().expect("non-empty");
    let n = (geom::dist(&from, &to) / spacing).ceil().max(1.0) as usize;
    for k in 1..n {
        let t = k as f64 / n as f64;
        pts.push(geom::add(&from, &geom::scale(&geom::sub(&to, &from), t)));
    }
    pts.push(to);
}

/// Disassembly paths in the goal frame (goal at the origin), reversed into
/// assembly order. Each path starts at a random free-space pose above the
/// socket and ends exactly at the goal.
///
/// Demo `i` draws from its own stream `split_seed(seed, i)`, stored as its seed.
pub fn generate_disassembly_demos(cfg: &EnvConfig, assembly_id: &str, count: usize, seed: u64) -> Result<DemoSet> {
    cfg.validate()?;
    if count == 0 {
        return Err(Error::EmptyDemoSet);
    }
    let rim = cfg.channel_depth;
    let demos = (0..count)
        .map(|i| {
            let demo_seed = split_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(demo_seed);
            let mut target = cfg.demo_free_space_ranges.sample(&mut rng);
            target[2] += rim;

            let mut pts = vec![[0.0; 3]];
            extend_line(&mut pts, [0.0, 0.0, rim + cfg.demo_retract_clearance], cfg.demo_channel_spacing);
            extend_line(&mut pts, target, cfg.demo_free_spacing);
            Ok(Demo {
                id: format!("demo-{i:04}"),
                path: reverse_path(&Path::new(pts)?),
                source: DemoSource::Generated,
                seed: demo_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DemoSet::new(assembly_id, demos)
}
