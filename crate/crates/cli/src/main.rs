//! `spwt`: surfaces, secrecy-rate sweeps, single designs, and the oracle suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spwt_core::experiment::{run_design, run_oracle_suite, run_surface, run_sweep, ExperimentConfig};
use spwt_core::{Error, Scheme, SolverError, SolverReport};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "spwt", version, about = "Regional-robust secure precise wireless transmission simulator")]
struct Cli {
    /// Print the built-in reference configuration and exit.
    #[arg(long, global = true)]
    print_preset: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design for one scheme and write the SINR over the window to surface.csv.
    Surface(Common),
    /// Monte Carlo secrecy rate versus SNR, written to sweep.csv.
    Sweep(Common),
    /// Design the beamformer and AN vector and write design.csv.
    Design(Common),
    /// Run the oracle checks; exits with status 4 if any fails.
    OracleSuite(Common),
    /// Print the built-in reference configuration.
    PrintPreset,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Regional,
    Point,
    Nonrobust,
}

#[derive(Args, Debug)]
struct Common {
    /// Key-value configuration file applied on top of the preset.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scheme for surface/design; restricts a sweep to this scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Desired sample points per user for the point scheme.
    #[arg(long, value_parser = ["4", "16", "64"])]
    points: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::reference(),
        };
        for s in &self.set {
            cfg.apply_override(s)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        let points = match &self.points {
            Some(p) => p.parse().expect("validated by clap"),
            None => match cfg.scheme {
                Scheme::Point(n) => n,
                _ => 4,
            },
        };
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Regional => Scheme::Regional,
                SchemeArg::Point => Scheme::Point(points),
                SchemeArg::Nonrobust => Scheme::NonRobust,
            };
            cfg.sweep_schemes = vec![cfg.scheme];
        } else if let (Some(_), Scheme::Point(_)) = (&self.points, cfg.scheme) {
            cfg.scheme = Scheme::Point(points);
        }
        Ok(cfg)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Solver(_) => EXIT_SOLVER,
        Error::Io { .. } => EXIT_IO,
    }
}

fn describe(name: &str, r: &SolverReport) {
    println!(
        "{name}: relaxed={:.6e} achieved={:.6e} gap={:.3e} iterations={} extraction={:?}",
        r.relaxed_value, r.achieved_min_ratio, r.relaxation_gap, r.iterations, r.extraction
    );
}

fn execute(command: &Command, common: &Common) -> Result<u8, Error> {
    let cfg = common.config()?;
    cfg.validate()?;
    match command {
        Command::Surface(_) => {
            let art = run_surface(&cfg)?;
            println!("wrote {} ({} rows)", art.path.display(), art.rows);
        }
        Command::Design(_) => {
            let art = run_design(&cfg)?;
            describe("beamformer", &art.pair.v_report);
            describe("artificial noise", &art.pair.w_report);
            println!("wrote {}", art.path.display());
        }
        Command::Sweep(_) => {
            let art = run_sweep(&cfg)?;
            println!("wrote {} ({} rows)", art.path.display(), art.outcome.rows.len());
            if !art.outcome.failures.is_empty() {
                for f in &art.outcome.failures {
                    eprintln!(
                        "trial {} {} at {} dB: {}",
                        f.trial, f.scheme, f.snr_db, f.message
                    );
                }
                return Err(SolverError::NoConvergence {
                    iterations: cfg.solver_settings().max_outer_iters,
                }
                .into());
            }
        }
        Command::OracleSuite(_) => {
            let report = run_oracle_suite(&cfg)?;
            print!("{}", report.render());
            if !report.passed() {
                eprintln!("oracle suite failed");
                return Ok(EXIT_ORACLE);
            }
        }
        Command::PrintPreset => unreachable!("handled before configuration"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_preset || matches!(cli.command, Some(Command::PrintPreset)) {
        print!("{}", ExperimentConfig::reference().to_config_string());
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        eprintln!("no subcommand given; see `spwt --help`");
        return ExitCode::from(EXIT_CONFIG);
    };
    let common = match command {
        Command::Surface(c) | Command::Sweep(c) | Command::Design(c) | Command::OracleSuite(c) => c,
        Command::PrintPreset => unreachable!("handled above"),
    };

    let run = || execute(command, common);
    let result = match common.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {n} worker threads: {e}");
                return ExitCode::from(EXIT_IO);
            }
        },
        None => run(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
