use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pwm_qoc::experiment::{
    run_bench, run_experiment, run_transform, smooth_train, write_bench_csv, write_experiment, BenchGrid,
    ExperimentConfig, Preset, SmoothMethod, TransformConfig,
};
use pwm_qoc::pulse::{write_signal_csv, write_spectrum_csv, PwmTrain};
use pwm_qoc::{QocError, Result};

#[derive(Parser)]
#[command(name = "qoc", version, about = "Quantum optimal control with pulse-width-modulated controls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "qoc-out")]
    out: PathBuf,
    /// Named configuration to start from.
    #[arg(long)]
    preset: Option<String>,
    /// Memory budget for gradient checkpoints, MB.
    #[arg(long = "mem-budget")]
    mem_budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// PWM-transform a signal; writes train.json and spectrum.csv.
    Transform {
        #[command(flatten)]
        common: Common,
        /// `t,u` CSV to transform instead of a preset signal.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        intervals: Option<usize>,
        /// Pulse amplitude, rad/s.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Multi-start width optimization; writes summary.json, per-run reports
    /// and traces, and best_train.json.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Number of seeded starts (seeds seed, seed+1, ...).
        #[arg(long)]
        starts: Option<usize>,
        /// Iteration limit per start.
        #[arg(long)]
        iterations: Option<usize>,
        /// Log every iteration to stderr.
        #[arg(long)]
        verbose: bool,
        /// Run the named experiment at full size (M = 100000; T = 10 s for
        /// six-qubit-cnot). Slow.
        #[arg(long)]
        full_scale: bool,
    },
    /// Accuracy-matched PWM and PWC propagation timings; writes bench.csv.
    Bench {
        #[command(flatten)]
        common: Common,
    },
    /// Smooth an optimized train and re-propagate it; writes one signal CSV
    /// per control and smooth_report.json.
    Smooth {
        #[command(flatten)]
        common: Common,
        /// Train JSON to smooth.
        #[arg(long)]
        train: PathBuf,
        #[arg(long, default_value = "anti-pwm")]
        method: String,
        #[arg(long, default_value_t = 16)]
        samples_per_interval: usize,
    },
}

fn experiment_config(common: &Common, fallback: Preset) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name.parse()?),
        (None, None) => ExperimentConfig::preset(fallback),
        (Some(_), Some(_)) => return Err(QocError::Config("give either --config or --preset, not both".into())),
    };
    if let Some(seed) = common.seed {
        cfg.optimizer.seed = seed;
    }
    if let Some(mb) = common.mem_budget {
        cfg.optimizer.memory_budget_mb = mb;
    }
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Transform {
            common,
            signal,
            horizon,
            intervals,
            eps,
        } => {
            let mut cfg = match &common.config {
                Some(p) => TransformConfig::load(p)?,
                None => TransformConfig::default(),
            };
            if let Some(p) = common.preset {
                cfg.preset = p;
            }
            cfg.signal = signal.or(cfg.signal);
            cfg.horizon = horizon.unwrap_or(cfg.horizon);
            cfg.intervals = intervals.unwrap_or(cfg.intervals);
            cfg.eps = eps.unwrap_or(cfg.eps);
            let (train, spectrum) = run_transform(&cfg)?;
            fs::create_dir_all(&common.out)?;
            train.save(&common.out.join("train.json"))?;
            write_spectrum_csv(&spectrum, fs::File::create(common.out.join("spectrum.csv"))?)?;
            println!(
                "transformed {} intervals (tau = {:e} s) into {}",
                train.intervals(),
                train.tau(),
                common.out.join("train.json").display()
            );
        }
        Command::Optimize {
            common,
            starts,
            iterations,
            verbose,
            full_scale,
        } => {
            let mut cfg = experiment_config(&common, Preset::ThreeQubitRotation)?;
            if full_scale {
                cfg = cfg.full_scale();
            }
            cfg.starts = starts.unwrap_or(cfg.starts);
            cfg.optimizer.max_iterations = iterations.unwrap_or(cfg.optimizer.max_iterations);
            cfg.optimizer.verbose |= verbose;
            let out = cfg.out.clone().unwrap_or(common.out);
            let (summary, reports) = run_experiment(&cfg)?;
            write_experiment(&out, &summary, &reports)?;
            write_json(&out.join("config.json"), &cfg)?;
            for r in &summary.runs {
                println!(
                    "seed {:>4}  {:<15} iterations {:>4}  IF {:.4e}",
                    r.seed,
                    format!("{:?}", r.status),
                    r.iterations,
                    r.final_infidelity
                );
            }
            println!(
                "{}/{} starts reached IF <= {:e}; best IF {:.4e} (seed {})",
                summary.converged, summary.starts, summary.target_infidelity, summary.best_infidelity, summary.best_seed
            );
        }
        Command::Bench { common } => {
            let grid = match (&common.config, common.preset.as_deref()) {
                (Some(p), _) => serde_json::from_str(&fs::read_to_string(p)?)?,
                (None, None | Some("full")) => BenchGrid::default(),
                (None, Some("quick")) => BenchGrid {
                    horizons: vec![20e-6],
                    exponents: vec![1, 2],
                    ..BenchGrid::default()
                },
                (None, Some(other)) => {
                    return Err(QocError::Config(format!("unknown bench preset '{other}' (full, quick)")))
                }
            };
            let cells = run_bench(&grid)?;
            fs::create_dir_all(&common.out)?;
            write_bench_csv(&cells, fs::File::create(common.out.join("bench.csv"))?)?;
            write_bench_csv(&cells, std::io::stdout().lock())?;
        }
        Command::Smooth {
            common,
            train,
            method,
            samples_per_interval,
        } => {
            let cfg = experiment_config(&common, Preset::ThreeQubitRotation)?;
            let method: SmoothMethod = method.parse()?;
            let train = PwmTrain::load(&train)?;
            let (signals, report) = smooth_train(&cfg.problem()?, &train, method, samples_per_interval)?;
            fs::create_dir_all(&common.out)?;
            let dt = train.tau() / samples_per_interval.max(1) as f64;
            for (i, s) in signals.iter().enumerate() {
                let file = fs::File::create(common.out.join(format!("smoothed-{i}.csv")))?;
                write_signal_csv(s, file, dt, train.horizon())?;
            }
            write_json(&common.out.join("smooth_report.json"), &report)?;
            println!(
                "train IF {:.4e}  smoothed IF {:.4e}  difference {:.4e}",
                report.train_infidelity, report.smoothed_infidelity, report.difference
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
