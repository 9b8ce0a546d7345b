//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmatch::curriculum::{record_and_maybe_advance, sample_initial_height};
use trajmatch::env::{generate_disassembly_demos, EnvState};
use trajmatch::io::{read_demos, write_demos};
use trajmatch::{
    batch_dtw_reward, batch_signature_reward, compare_schemes, dtw_cost, dtw_cost_banded, dtw_imitation_reward,
    par_batch_dtw_reward, par_batch_signature_reward, signature, signature_imitation_reward, soft_dtw_cost, squash,
    state_based_reward, window, AxisRanges, CurriculumConfig, CurriculumState, Demo, DemoSet, DemoSource, EnvConfig,
    ExperimentConfig, Path, Point3, RewardConfig, Scheme,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_path(r: &mut ChaCha8Rng, max_len: usize) -> Vec<Point3> {
    let n = r.random_range(1..=max_len);
    (0..n).map(|_| [r.random(), r.random(), r.random()]).collect()
}

fn path(points: Vec<Point3>) -> Path {
    Path::new(points).unwrap()
}

fn euclid(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Minimum over every monotone, endpoint-aligned alignment, enumerated by
/// depth-first search. Costs accumulate from the start of the alignment.
fn dtw_enumerated(a: &[Point3], b: &[Point3]) -> f64 {
    let mut best = f64::INFINITY;
    let mut stack = vec![(0usize, 0usize, 0.0f64)];
    while let Some((i, j, acc)) = stack.pop() {
        let acc = euclid(&a[i], &b[j]) + acc;
        if i + 1 == a.len() && j + 1 == b.len() {
            best = best.min(acc);
            continue;
        }
        if i + 1 < a.len() {
            stack.push((i + 1, j, acc));
        }
        if j + 1 < b.len() {
            stack.push((i, j + 1, acc));
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            stack.push((i + 1, j + 1, acc));
        }
    }
    best
}

/// Nested sums over increments, each lower-level prefix recomputed from scratch.
fn signature_direct(x: &[Point3], level: usize) -> Vec<f64> {
    fn term(x: &[Point3], idx: &[usize], n: usize) -> f64 {
        match idx.split_last() {
            None => 1.0,
            Some((&last, rest)) => (0..n)
                .map(|k| term(x, rest, k + 1) * (x[k + 1][last] - x[k][last]))
                .sum(),
        }
    }
    let n = x.len() - 1;
    let mut out = vec![1.0];
    for m in 1..=level {
        for flat in 0..3usize.pow(m as u32) {
            let idx: Vec<usize> = (0..m).rev().map(|p| flat / 3usize.pow(p as u32) % 3).collect();
            out.push(term(x, &idx, n));
        }
    }
    out
}

fn c1_dtw_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    for k in 0..1000 {
        let a = unit_path(&mut r, 8);
        let b = unit_path(&mut r, 8);
        let fast = dtw_cost(&path(a.clone()), &path(b.clone())).cost;
        let slow = dtw_enumerated(&a, &b);
        check(fast == slow, || format!("pair {k}: {fast} != {slow}"))?;
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(10), || format!("took {t:?}"))?;
    Ok(format!("1000 pairs exact in {t:.2?}"))
}

fn c2_banded() -> Outcome {
    let mut r = rng(2);
    for k in 0..1000 {
        let a = path(unit_path(&mut r, 12));
        let b = path(unit_path(&mut r, 12));
        let band = a.len().max(b.len());
        let full = dtw_cost(&a, &b);
        let banded = dtw_cost_banded(&a, &b, band).map_err(|e| e.to_string())?;
        check(full.cost.to_bits() == banded.cost.to_bits() && full.alignment == banded.alignment, || {
            format!("pair {k}: {} vs {}", full.cost, banded.cost)
        })?;
    }
    Ok("1000 pairs bit-identical".into())
}

fn c3_soft_limit() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let a = path(unit_path(&mut r, 10));
        let b = path(unit_path(&mut r, 10));
        let soft = soft_dtw_cost(&a, &b, 1e-6).map_err(|e| e.to_string())?;
        let gap = (soft - dtw_cost(&a, &b).cost).abs();
        worst = worst.max(gap);
        check(gap < 1e-3, || format!("pair {k}: gap {gap}"))?;
    }
    Ok(format!("200 pairs, max gap {worst:.2e}"))
}

fn c4_signature_oracle() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for k in 0..500 {
        let pts = unit_path(&mut r, 6);
        for level in 1..=3 {
            let fast = signature(&path(pts.clone()), level).map_err(|e| e.to_string())?;
            let slow = signature_direct(&pts, level);
            let scale = slow.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let err = fast.terms().iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            worst = worst.max(err);
            check(fast.terms().len() == slow.len() && err <= 1e-12, || format!("path {k} level {level}: {err}"))?;
        }
    }
    Ok(format!("500 paths x 3 levels, max rel err {worst:.2e}"))
}

fn c5_invariances() -> Outcome {
    let mut r = rng(5);
    // Coordinates and offsets on a 2^-20 grid keep every sum exact.
    let grid = |r: &mut ChaCha8Rng| r.random_range(-(1i64 << 20)..(1i64 << 20)) as f64 / (1u64 << 20) as f64;
    for k in 0..500 {
        let n = r.random_range(1..=12);
        let pts: Vec<Point3> = (0..n).map(|_| [grid(&mut r), grid(&mut r), grid(&mut r)]).collect();
        let c = [grid(&mut r) * 8.0, grid(&mut r) * 8.0, grid(&mut r) * 8.0];
        let moved: Vec<Point3> = pts.iter().map(|p| [p[0] + c[0], p[1] + c[1], p[2] + c[2]]).collect();
        let level = 1 + k % 3;
        let s = signature(&path(pts.clone()), level).map_err(|e| e.to_string())?;
        let t = signature(&path(moved), level).map_err(|e| e.to_string())?;
        check(s.terms().iter().zip(t.terms()).all(|(a, b)| a.to_bits() == b.to_bits()), || {
            format!("translation changed path {k}")
        })?;

        let raw = unit_path(&mut r, 10);
        let at = r.random_range(0..raw.len());
        let mut dup = raw.clone();
        dup.insert(at, raw[at]);
        let s = signature(&path(raw), level).map_err(|e| e.to_string())?;
        let d = signature(&path(dup), level).map_err(|e| e.to_string())?;
        let err = s.terms().iter().zip(d.terms()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        check(err <= 1e-12, || format!("duplication changed path {k} by {err}"))?;
    }
    Ok("500 paths: translation bit-exact, duplication <= 1e-12".into())
}

fn random_demos(r: &mut ChaCha8Rng, count: usize) -> DemoSet {
    DemoSet::from_paths("x", (0..count).map(|_| path(unit_path(r, 15))).collect()).unwrap()
}

fn c6_reward_bounds() -> Outcome {
    let mut r = rng(6);
    let in_range = |v: f64| v > 0.0 && v <= 1.0;
    for k in 0..300 {
        let ee = path(unit_path(&mut r, 12));
        let count = r.random_range(1..6);
        let demos = random_demos(&mut r, count);
        let w = window(&ee, ee.len() - 1, 10).unwrap();
        for d in demos.paths() {
            let dr = dtw_imitation_reward(&w, d);
            let sr = signature_imitation_reward(&ee, d, 3).map_err(|e| e.to_string())?;
            check(in_range(dr) && in_range(sr), || format!("case {k}: dtw {dr}, sig {sr}"))?;
        }
        let st = state_based_reward(ee.last(), &demos).map_err(|e| e.to_string())?;
        check(in_range(st), || format!("case {k}: state {st}"))?;

        let (d0, _) = batch_dtw_reward(&w, &demos).unwrap();
        let (s0, _) = batch_signature_reward(&ee, &demos, 3).unwrap();
        let mut bigger = demos.clone();
        let extra = r.random_range(1..4);
        for p in random_demos(&mut r, extra).paths() {
            bigger.push(Demo {
                id: "extra".into(),
                path: p.clone(),
                source: DemoSource::Imported,
                seed: 0,
            });
        }
        let (d1, _) = batch_dtw_reward(&w, &bigger).unwrap();
        let (s1, _) = batch_signature_reward(&ee, &bigger, 3).unwrap();
        let st1 = state_based_reward(ee.last(), &bigger).unwrap();
        check(d1 >= d0 && s1 >= s0 && st1 >= st, || format!("case {k}: extending the demo set lowered a reward"))?;

        let (x, y) = (r.random_range(0.0..20.0), r.random_range(0.0..20.0));
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        check(squash(lo) >= squash(hi) && squash(hi) > 0.0, || format!("squash not monotone at {lo}, {hi}"))?;
    }
    Ok("300 cases: rewards in (0,1], monotone squash, max over demos non-decreasing".into())
}

fn c7_curriculum() -> Outcome {
    let cfg = CurriculumConfig::default();
    let mut state = CurriculumState::new(&cfg).map_err(|e| e.to_string())?;
    let mut r = rng(7);
    let mut p_success = 0.5;
    let mut bounds = vec![state.lower_bound()];
    for call in 0..10_000 {
        if call % 250 == 0 {
            p_success = r.random_range(0.3..1.0);
        }
        let h = sample_initial_height(&state, &mut r);
        check(h >= state.lower_bound() && h <= state.h_max, || format!("call {call}: height {h} out of bounds"))?;
        let before = state.stage;
        let h_max = state.h_max;
        state = record_and_maybe_advance(state, r.random_bool(p_success));
        check(state.stage == before || state.stage == before + 1, || format!("call {call}: stage jumped"))?;
        check(state.h_max == h_max, || format!("call {call}: h_max moved"))?;
        if state.stage > before {
            check(state.lower_bound() > *bounds.last().unwrap(), || format!("call {call}: lower bound did not increase"))?;
            bounds.push(state.lower_bound());
        }
    }
    Ok(format!("10000 calls, reached stage {} with bounds {bounds:?}", state.stage))
}

fn c8_scheme_ordering() -> Outcome {
    let start = Instant::now();
    let exp = ExperimentConfig {
        episodes_per_scheme: 500,
        ..ExperimentConfig::default()
    };
    let report = compare_schemes(&exp).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let rate = |s| 100.0 * report.success_rate(s).unwrap();
    let (none, state, dtw, sig) = (rate(Scheme::None), rate(Scheme::State), rate(Scheme::Dtw), rate(Scheme::Signature));
    let summary = format!("none {none:.1}%, state {state:.1}%, dtw {dtw:.1}%, signature {sig:.1}% in {t:.1?}");
    let mut failed = Vec::new();
    if dtw < state + 10.0 {
        failed.push("dtw < state + 10");
    }
    if state < none + 10.0 {
        failed.push("state < none + 10");
    }
    if sig < none + 10.0 {
        failed.push("signature < none + 10");
    }
    if t >= Duration::from_secs(300) {
        failed.push("runtime >= 5 min");
    }
    if failed.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; violated: {}", failed.join(", ")))
    }
}

fn c9_demo_reversal() -> Outcome {
    let cfg = EnvConfig::default().noise_free();
    let demos = generate_disassembly_demos(&cfg, "00000", 100, 9).map_err(|e| e.to_string())?;
    let socket_pos = [0.5, 0.0, 0.17];
    let goal = [socket_pos[0] + cfg.channel_offset[0], socket_pos[1] + cfg.channel_offset[1], socket_pos[2]];
    for (k, d) in demos.translated(&goal).demos().iter().enumerate() {
        let pts = d.path.points();
        let mut env = EnvState::at(&cfg, socket_pos, pts[0]).map_err(|e| e.to_string())?;
        for w in pts.windows(2) {
            if env.done {
                break;
            }
            let a = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
            env.step_mut(&a).map_err(|e| e.to_string())?;
        }
        let miss = euclid(&env.plug_pos, &goal);
        check(env.success && miss < 0.002, || format!("demo {k} ended {miss} m from the goal"))?;
    }
    Ok("100 demos reach the goal".into())
}

fn c10_parallel_equivalence() -> Outcome {
    let demos = generate_disassembly_demos(&EnvConfig::default(), "00000", 100, 10).map_err(|e| e.to_string())?;
    let mut r = rng(10);
    for k in 0..50 {
        let d = &demos.demos()[r.random_range(0..demos.len())].path;
        let jitter: Vec<Point3> = d
            .points()
            .iter()
            .map(|p| [p[0] + r.random_range(-1e-3..1e-3), p[1], p[2] + r.random_range(-1e-3..1e-3)])
            .collect();
        let t = r.random_range(0..jitter.len());
        let w = window(&path(jitter.clone()), t, 10).unwrap();
        let prefix = path(jitter[..=t].to_vec());
        let same = |a: (f64, usize), b: (f64, usize)| a.0.to_bits() == b.0.to_bits() && a.1 == b.1;
        check(
            same(batch_dtw_reward(&w, &demos).unwrap(), par_batch_dtw_reward(&w, &demos).unwrap()),
            || format!("dtw window {k}"),
        )?;
        check(
            same(
                batch_signature_reward(&prefix, &demos, 3).unwrap(),
                par_batch_signature_reward(&prefix, &demos, 3).unwrap(),
            ),
            || format!("signature path {k}"),
        )?;
    }
    Ok("100 demos x window 10: parallel == sequential for 50 queries".into())
}

fn c11_round_trips() -> Outcome {
    let mut r = rng(11);
    for k in 0..50 {
        let n = r.random_range(1..20);
        let demos: Vec<Demo> = (0..n)
            .map(|i| {
                let len = r.random_range(1..40);
                let pts: Vec<Point3> = (0..len)
                    .map(|_| [r.random_range(-1e3..1e3), r.random::<f64>() * 1e-9, r.random_range(-1.0..1.0)])
                    .collect();
                Demo {
                    id: format!("d{i}"),
                    path: path(pts),
                    source: if r.random_bool(0.5) { DemoSource::Generated } else { DemoSource::Imported },
                    seed: r.random(),
                }
            })
            .collect();
        let set = DemoSet::new(format!("{:05}", r.random_range(0..100_000)), demos).unwrap();
        let mut buf = Vec::new();
        write_demos(&set, &mut buf).map_err(|e| e.to_string())?;
        let back = read_demos(&buf[..]).map_err(|e| e.to_string())?;
        check(back == set, || format!("demo set {k} changed on reload"))?;

        let mut cfg = ExperimentConfig {
            root_seed: r.random(),
            episodes_per_scheme: r.random_range(1..10_000),
            demo_count: r.random_range(1..500),
            ..ExperimentConfig::default()
        };
        cfg.reward = RewardConfig {
            omega_i: r.random_range(0.0..5.0),
            omega_b: r.random_range(0.0..5.0),
            success_threshold: r.random_range(1e-4..1e-2),
            ..RewardConfig::default()
        };
        cfg.env.channel_half_width = r.random_range(1e-4..1e-3);
        cfg.env.obs_noise_ranges = AxisRanges::symmetric(r.random(), r.random(), r.random::<f64>() * 1e-3);
        cfg.curriculum.window = r.random_range(1..500);
        cfg.schemes = Scheme::ALL.into_iter().filter(|_| r.random_bool(0.7)).collect();
        if cfg.schemes.is_empty() {
            cfg.schemes.push(Scheme::Dtw);
        }
        let text = cfg.to_toml().map_err(|e| e.to_string())?;
        let parsed = ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())?;
        check(parsed == cfg, || format!("config {k} changed on reload"))?;
    }
    Ok("50 demo sets and 50 configs round-trip exactly".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("DTW matches brute-force enumeration", c1_dtw_oracle),
        ("banded DTW with full band is identical", c2_banded),
        ("soft-DTW approaches DTW as gamma -> 0", c3_soft_limit),
        ("signature matches direct nested sums", c4_signature_oracle),
        ("signature translation/duplication invariance", c5_invariances),
        ("reward bounds and max-over-demos monotonicity", c6_reward_bounds),
        ("curriculum contract", c7_curriculum),
        ("scheme ordering on the noisy narrow passage", c8_scheme_ordering),
        ("reversed demos replay to the goal", c9_demo_reversal),
        ("parallel kernels equal sequential", c10_parallel_equivalence),
        ("I/O round-trips", c11_round_trips),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("{id} PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("{id} FAIL  {name}: {detail}");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
