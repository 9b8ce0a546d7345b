use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmatch::io::{load_checkpoint, load_demos, load_path_csv, save_checkpoint, save_demos, save_report_csv};
use trajmatch::{
    batch_dtw_reward, batch_signature_reward, dtw_cost, dtw_match, extract_segment, generate_disassembly_demos,
    imitation_reward_max, par_batch_dtw_reward, par_batch_signature_reward, reverse_path, squash, window, DemoSet,
    ExperimentConfig, Path, Point3,
};

#[derive(Parser)]
#[command(name = "trajmatch", version, about = "Trajectory matching and imitation-reward toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Demonstration datasets.
    #[command(subcommand)]
    Demos(DemosCmd),
    /// Imitation rewards along a path.
    #[command(subcommand)]
    Reward(RewardCmd),
    /// Match a window against every demo and dump the best alignment.
    Match(MatchArgs),
    /// Scheme comparison experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Throughput of sequential and parallel batch reward kernels.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum DemosCmd {
    /// Generate reversed disassembly demos in the goal frame.
    Gen(GenArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Experiment config; its `env` section and `assembly_id` are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's assembly id.
    #[arg(long)]
    assembly_id: Option<String>,
}

#[derive(Subcommand)]
enum RewardCmd {
    /// Per-timestep reward as CSV (t,reward,best_demo).
    Eval(EvalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatchScheme {
    State,
    Dtw,
    Signature,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    demos: PathBuf,
    /// CSV file with x,y,z rows.
    #[arg(long)]
    path: PathBuf,
    #[arg(long, value_enum)]
    scheme: MatchScheme,
    /// Signature truncation level (signature scheme only).
    #[arg(long)]
    level: Option<usize>,
    /// DTW window length.
    #[arg(long, default_value_t = 10)]
    window_len: usize,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlignScheme {
    Dtw,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    demos: PathBuf,
    /// CSV file with x,y,z rows.
    #[arg(long)]
    window: PathBuf,
    #[arg(long, value_enum, default_value = "dtw")]
    scheme: AlignScheme,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run the scheme comparison and write a timestamped run directory.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Parent directory for the run (defaults to the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Previous run directory whose curriculum checkpoint seeds this run.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    demos: PathBuf,
    #[arg(long, default_value_t = 10)]
    window_len: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    level: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Demos(DemosCmd::Gen(a)) => demos_gen(a),
        Command::Reward(RewardCmd::Eval(a)) => reward_eval(a),
        Command::Match(a) => match_cmd(a),
        Command::Experiment(ExperimentCmd::Run(a)) => experiment_run(a),
        Command::Bench(a) => bench(a),
    }
}

fn load_config(path: &FsPath) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("config {}", path.display()))
}

fn read_demos(path: &FsPath) -> Result<DemoSet> {
    load_demos(path).with_context(|| format!("demos {}", path.display()))
}

fn read_path(path: &FsPath) -> Result<Path> {
    load_path_csv(path).with_context(|| format!("path file {}", path.display()))
}

fn demos_gen(a: GenArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    let assembly = a.assembly_id.unwrap_or(cfg.assembly_id);
    let set = generate_disassembly_demos(&cfg.env, &assembly, a.count, a.seed)?;
    save_demos(&set, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("wrote {} demos to {}", set.len(), a.out.display());
    Ok(())
}

fn reward_rows(a: &EvalArgs, demos: &DemoSet, path: &Path) -> Result<Vec<(f64, usize)>> {
    if a.level.is_some() && a.scheme != MatchScheme::Signature {
        bail!("--level only applies to --scheme signature");
    }
    let level = a.level.unwrap_or(3);
    (0..path.len())
        .map(|t| {
            Ok(match a.scheme {
                MatchScheme::State => {
                    let p = path.points()[t];
                    let per_demo: Vec<f64> = demos
                        .paths()
                        .map(|d| {
                            let near = d.points().iter().map(|q| dist(q, &p)).fold(f64::INFINITY, f64::min);
                            squash(near)
                        })
                        .collect();
                    imitation_reward_max(&per_demo)?
                }
                MatchScheme::Dtw => batch_dtw_reward(&window(path, t, a.window_len)?, demos)?,
                MatchScheme::Signature => {
                    let prefix = Path::new(path.points()[..=t].to_vec())?;
                    batch_signature_reward(&prefix, demos, level)?
                }
            })
        })
        .collect()
}

fn dist(a: &Point3, b: &Point3) -> f64 {
    trajmatch::geom::dist(a, b)
}

fn reward_eval(a: EvalArgs) -> Result<()> {
    let demos = read_demos(&a.demos)?;
    let path = read_path(&a.path)?;
    let rows = reward_rows(&a, &demos, &path)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["t", "reward", "best_demo"])?;
    for (t, (r, best)) in rows.iter().enumerate() {
        w.write_record([t.to_string(), r.to_string(), best.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn match_cmd(a: MatchArgs) -> Result<()> {
    let AlignScheme::Dtw = a.scheme;
    let demos = read_demos(&a.demos)?;
    let win = read_path(&a.window)?;
    let (reward, best) = batch_dtw_reward(&win, &demos)?;
    let demo = &demos.demos()[best];
    let m = dtw_match(&win, &demo.path);
    let seg = extract_segment(&demo.path, m.segment.0, m.segment.1)?;
    let full = dtw_cost(&win, &seg);
    println!("best_demo {best}");
    println!("demo_id {}", demo.id);
    println!("reward {reward}");
    println!("cost {}", m.cost);
    println!("segment {} {}", m.segment.0, m.segment.1);
    println!("alignment window_index demo_index");
    for (i, j) in full.alignment.unwrap_or_default() {
        println!("{i} {}", j + m.segment.0);
    }
    Ok(())
}

fn experiment_run(a: RunArgs) -> Result<()> {
    let cfg = load_config(&a.config)?;
    let initial = match &a.resume {
        Some(dir) => {
            let file = dir.join("curriculum.json");
            load_checkpoint(&file).with_context(|| format!("checkpoint {}", file.display()))?
        }
        None => Default::default(),
    };
    let parent = a.out.unwrap_or_else(|| cfg.output.dir.clone());
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S%.3f");
    let mut dir = parent.join(format!("run-{stamp}"));
    let mut n = 1;
    while dir.exists() {
        dir = parent.join(format!("run-{stamp}-{n}"));
        n += 1;
    }
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    cfg.save(&dir.join("config.toml"))?;

    let report = trajmatch::env::compare_schemes_from(&cfg, &initial)?;
    save_report_csv(&report, &dir.join("report.csv"))?;
    std::fs::write(dir.join("report.txt"), report.to_table())?;
    save_checkpoint(&report.curricula, &dir.join("curriculum.json"))?;
    print!("{}", report.to_table());
    println!("run directory: {}", dir.display());
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    ensure!(a.window_len > 0, "--window-len must be positive");
    ensure!(a.iters > 0, "--iters must be positive");
    let demos = read_demos(&a.demos)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let windows: Vec<Path> = (0..a.iters)
        .map(|_| {
            let d = &demos.demos()[rng.random_range(0..demos.len())].path;
            let t = rng.random_range(0..d.len());
            let w = window(d, t, a.window_len)?;
            // Alternate directions so both matched and mismatched windows are timed.
            Ok(if rng.random_bool(0.5) { reverse_path(&w) } else { w })
        })
        .collect::<Result<_>>()?;

    type Kernel = fn(&Path, &DemoSet, usize) -> trajmatch::Result<(f64, usize)>;
    let kernels: [(&str, Kernel, Kernel); 2] = [
        ("dtw", |w, d, _| batch_dtw_reward(w, d), |w, d, _| par_batch_dtw_reward(w, d)),
        ("signature", batch_signature_reward, par_batch_signature_reward),
    ];
    println!("kernel,mode,evaluations,seconds,evals_per_sec");
    for (name, seq, par) in kernels {
        let time = |f: Kernel| -> Result<(Vec<(f64, usize)>, f64)> {
            let start = Instant::now();
            let out = windows.iter().map(|w| f(w, &demos, a.level)).collect::<trajmatch::Result<Vec<_>>>()?;
            Ok((out, start.elapsed().as_secs_f64()))
        };
        let (s_vals, s_secs) = time(seq)?;
        let (p_vals, p_secs) = time(par)?;
        let identical = s_vals
            .iter()
            .zip(&p_vals)
            .all(|(x, y)| x.0.to_bits() == y.0.to_bits() && x.1 == y.1);
        ensure!(identical, "{name}: parallel results differ from sequential");
        let evals = windows.len() * demos.len();
        for (mode, secs) in [("sequential", s_secs), ("parallel", p_secs)] {
            println!("{name},{mode},{evals},{secs:.6},{:.1}", evals as f64 / secs.max(1e-12));
        }
    }
    println!("parallel results identical to sequential");
    Ok(())
}
