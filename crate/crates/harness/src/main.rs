use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use csifb_harness::config::ConfigError;
use csifb_harness::{
    emit_csv, presets, run_sweep, selftest, write_csv, ExperimentConfig, Mode, Status,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "csifb",
    version,
    about = "MIMO-OFDM CSI feedback rate bounds and Monte Carlo sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic bounds only.
    Bounds(RunArgs),
    /// Monte Carlo only.
    Simulate(RunArgs),
    /// Analytic bounds and Monte Carlo.
    Sweep(RunArgs),
    /// List the built-in presets.
    Presets {
        /// Print the default configuration of this preset as TOML.
        #[arg(long)]
        show: Option<String>,
    },
    /// Run quick invariant checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a preset's default configuration instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Fail with exit code 3 when a row hits a resource cap.
    #[arg(long)]
    strict: bool,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_CAP: u8 = 3;

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => presets::experiment(name)?,
        (None, None) => {
            return Err(ConfigError::Invalid(
                "pass --config PATH or --preset NAME".into(),
            ))
        }
    };
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = args.trials {
        cfg.n_trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs, mode: Mode) -> anyhow::Result<ExitCode> {
    let cfg = match load_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().context("building worker pool")?;
    let records = pool.install(|| run_sweep(&cfg, mode))?;
    match &args.out {
        Some(path) => emit_csv(&records, path)?,
        None => write_csv(&records, std::io::stdout().lock())?,
    }
    let capped = records
        .iter()
        .filter(|r| r.status == Status::RvqBitsOverCap)
        .count();
    if capped > 0 {
        eprintln!(
            "{capped} row(s) exceed the RVQ codebook cap of {} bits",
            cfg.rvq.b_cap
        );
        if args.strict {
            return Ok(ExitCode::from(EXIT_CAP));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => run(a, Mode::BOUNDS),
        Command::Simulate(a) => run(a, Mode::SIMULATE),
        Command::Sweep(a) => run(a, Mode::SWEEP),
        Command::Presets { show } => match show {
            Some(name) => match presets::experiment(&name) {
                Ok(cfg) => {
                    print!("{}", cfg.to_toml());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(EXIT_CONFIG))
                }
            },
            None => {
                for (name, desc) in presets::names() {
                    println!("{name:<12} {desc}");
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Selftest { seed } => selftest::run(seed).map_err(Into::into).map(|checks| {
            let mut ok = true;
            for c in &checks {
                println!(
                    "{} {:<26} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                ok &= c.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
