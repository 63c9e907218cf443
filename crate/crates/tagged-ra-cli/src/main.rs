use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use tagged_ra_cli::acceptance;
use tagged_ra_cli::config::{ExperimentConfig, ExperimentKind};
use tagged_ra_cli::experiment::run_experiment;
use tagged_ra_cli::report::write_csv;

#[derive(Parser)]
#[command(
    name = "tagged-ra",
    about = "Experiment runner for the tagged random-access simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "phy_detection")]
    PhyDetection,
    #[value(name = "ra_success")]
    RaSuccess,
    #[value(name = "pusch_collision")]
    PuschCollision,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::PhyDetection => ExperimentKind::PhyDetection,
            KindArg::RaSuccess => ExperimentKind::RaSuccess,
            KindArg::PuschCollision => ExperimentKind::PuschCollision,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment described by a TOML config and write its CSV report
    Run {
        /// Path to the experiment config
        config: PathBuf,
        /// Override the config's random seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's Monte Carlo trial count
        #[arg(long)]
        trials: Option<u64>,
        /// Override the config's output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the built-in default experiment description as TOML
    Table1 {
        /// Experiment kind to print the defaults for
        #[arg(long, value_enum, default_value = "ra_success")]
        experiment: KindArg,
    },
    /// Run the full verification suite, one line per criterion
    Verify,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, seed, trials, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            if let Some(out) = out {
                cfg.out = out;
            }
            cfg.validate()?;
            let points = run_experiment(&cfg)?;
            write_csv(&points, &cfg.experiment.to_string(), cfg.trials, cfg.seed, &cfg.out)?;
            println!("wrote {} rows to {}", points.len(), cfg.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Table1 { experiment } => {
            let cfg = ExperimentConfig::default_for(experiment.into());
            print!("{}", cfg.to_toml()?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify => {
            let mut all_passed = true;
            let reports = acceptance::run_all_with(|r| println!("{}", r.line()));
            for r in &reports {
                all_passed &= r.passed;
            }
            if all_passed {
                println!("all {} criteria passed", reports.len());
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("verification failed");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}
