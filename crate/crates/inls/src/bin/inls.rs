use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use inls::config::{Command as ConfigCommand, ExperimentConfig};
use inls::error::Error;
use inls::harness;

/// Numerical laboratory for the 3D radial inhomogeneous NLS equation.
#[derive(Parser)]
#[command(name = "inls", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed echoed into the run summary.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the sweep lattice.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Verb {
    /// Ground-state constants (and the double-critical minimizer).
    Groundstate(CommonArgs),
    /// Payne-Sattinger classification of the configured initial datum.
    Classify(CommonArgs),
    /// Time evolution with conservation monitoring.
    Evolve(CommonArgs),
    /// Amplitude-by-lambda dichotomy sweep.
    Sweep(CommonArgs),
    /// Identity verification suites; exits zero iff all pass.
    Verify(CommonArgs),
}

const EXIT_CONFIG: u8 = 2;
const EXIT_REGIME: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParams(_) | Error::Io(_) => EXIT_CONFIG,
        Error::RegimeViolation(_) => EXIT_REGIME,
        _ => EXIT_NUMERICAL,
    }
}

fn load_config(args: &CommonArgs, verb: ConfigCommand) -> Result<ExperimentConfig, Error> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None if verb == ConfigCommand::Verify => {
            // verify runs fine on the reference defaults
            ExperimentConfig::from_toml_str(
                "command = \"verify\"\n[params]\na = 1.0\nb = 0.5\np = 4.0\n",
            )?
        }
        None => {
            return Err(Error::Config(format!(
                "command \"{}\" requires --config",
                verb.as_str()
            )))
        }
    };
    if cfg.command != verb {
        return Err(Error::Config(format!(
            "config declares command \"{}\" but the CLI verb is \"{}\"",
            cfg.command.as_str(),
            verb.as_str()
        )));
    }
    Ok(cfg)
}

fn install_thread_pool(threads: Option<usize>) {
    if let Some(n) = threads {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn real_main() -> Result<u8, Error> {
    let cli = Cli::parse();
    let (args, verb) = match &cli.command {
        Verb::Groundstate(a) => (a, ConfigCommand::Groundstate),
        Verb::Classify(a) => (a, ConfigCommand::Classify),
        Verb::Evolve(a) => (a, ConfigCommand::Evolve),
        Verb::Sweep(a) => (a, ConfigCommand::Sweep),
        Verb::Verify(a) => (a, ConfigCommand::Verify),
    };
    install_thread_pool(args.threads);
    let cfg = load_config(args, verb)?;

    match verb {
        ConfigCommand::Sweep => {
            let cells = harness::sweep(&cfg, args.out.as_deref(), args.seed)?;
            for c in &cells {
                let verdict = c
                    .verdict
                    .map(|v| format!("{v:?}"))
                    .unwrap_or_else(|| "-".into());
                let outcome = c
                    .outcome
                    .map(|o| format!("{o:?}"))
                    .unwrap_or_else(|| c.error.clone().unwrap_or_default());
                println!(
                    "amplitude={:<8} lambda={:<8} {verdict:<16} {outcome}",
                    c.amplitude, c.lambda
                );
            }
            Ok(0)
        }
        _ => {
            let summary = harness::run(&cfg, args.out.as_deref(), args.seed)?;
            print!("{}", summary.to_json());
            if verb == ConfigCommand::Verify && !summary.verify_passed() {
                return Ok(1);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
