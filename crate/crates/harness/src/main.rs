use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fibertherm_harness::config::{ConfigError, ExperimentConfig, Task};
use fibertherm_harness::run::{run, Failure, Overrides};
use fibertherm_harness::selftest::{selftest, SelftestOptions};

/// Thermodynamic-formalism experiments on skew products.
#[derive(Parser)]
#[command(name = "fibertherm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file; required by every task except selftest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fiber-step budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    Pressure,
    Spectrum,
    Shadow,
    Katok,
    Crosscheck,
    /// Runs the oracle battery and prints a pass/fail table.
    Selftest {
        /// Restrict to the named check groups.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("{}", serde_json::to_string_pretty(&f.to_json()).expect("json serializes"));
    ExitCode::from(f.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // Usage errors share the validation exit code; help and version exit 0.
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    let ov = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        budget: cli.budget,
        threads: cli.threads,
    };
    let task = match cli.command {
        Command::Pressure => Task::Pressure,
        Command::Spectrum => Task::Spectrum,
        Command::Shadow => Task::Shadow,
        Command::Katok => Task::Katok,
        Command::Crosscheck => Task::Crosscheck,
        Command::Selftest { only } => {
            if cli.config.is_some() {
                return fail(&Failure::Config(ConfigError::at("--config", "selftest takes no config")));
            }
            if let Some(t) = cli.threads {
                fibertherm::parallel::set_threads(t);
            }
            let opts = SelftestOptions {
                seed: cli.seed.unwrap_or(0),
                only: (!only.is_empty()).then_some(only),
                ..SelftestOptions::default()
            };
            let out = cli.out.unwrap_or_else(|| PathBuf::from("selftest-out"));
            return match selftest(&opts, &out) {
                Ok(report) => {
                    print!("{}", report.table());
                    if report.pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(f) => fail(&f),
            };
        }
    };
    let Some(path) = cli.config else {
        return fail(&Failure::Config(ConfigError::at("--config", format!("task {task} needs --config"))));
    };
    let cfg = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => return fail(&Failure::Config(e)),
    };
    match run(task, &cfg, &ov) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => fail(&f),
    }
}
