use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contact_defects::harness::{accept, report, run, AcceptOptions, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(version, about = "Saddle-node passage times, wave trains and truncated contact defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; its `experiment` must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized consistency checks (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    TravelTime,
    LogCoeff,
    InvertEpsilon,
    Asymptote,
    CenterFlow,
    Wavetrain,
    Dispersion,
    Defect,
    Scaling,
    /// Runs the acceptance suite.
    Accept {
        /// Comma-separated criteria to run; the others are reported SKIPPED.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Multiplies every tolerance (0 forces failures).
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

fn experiment(cmd: &Command) -> Option<Experiment> {
    Some(match cmd {
        Command::TravelTime => Experiment::TravelTime,
        Command::LogCoeff => Experiment::LogCoefficient,
        Command::InvertEpsilon => Experiment::InvertEpsilon,
        Command::Asymptote => Experiment::Asymptote,
        Command::CenterFlow => Experiment::CenterFlow,
        Command::Wavetrain => Experiment::WaveTrain,
        Command::Dispersion => Experiment::Dispersion,
        Command::Defect => Experiment::DefectContinuation,
        Command::Scaling => Experiment::ScalingReport,
        Command::Accept { .. } => return None,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("--jobs: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> contact_defects::Result<ExitCode> {
    let c = &cli.common;
    if let Command::Accept { only, tolerance_scale } = &cli.command {
        let opts = AcceptOptions {
            out_dir: c.out.clone().unwrap_or_else(|| AcceptOptions::default().out_dir),
            seed: c.seed.unwrap_or(0),
            only: only.clone(),
            tolerance_scale: *tolerance_scale,
        };
        let summary = accept(&opts, |r| println!("{r}"))?;
        print!("{}", report(&summary).lines().last().map(|l| format!("{l}\n")).unwrap_or_default());
        return Ok(ExitCode::from(summary.exit_code() as u8));
    }
    let kind = experiment(&cli.command).expect("non-accept subcommand");
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.experiment != kind {
        return Err(contact_defects::Error::ConfigInvalid(format!(
            "experiment: config is for {:?}, subcommand runs {kind:?}",
            cfg.experiment
        )));
    }
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let rec = run(&cfg)?;
    for ch in &rec.checks {
        println!(
            "{:<40} {:>24.16e} vs {:>24.16e}  {}",
            ch.name,
            ch.measured,
            ch.expected,
            if ch.pass { "ok" } else { "FAIL" }
        );
    }
    println!("wrote {} table(s) to {}", rec.tables.len(), cfg.output_dir.display());
    Ok(if rec.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
