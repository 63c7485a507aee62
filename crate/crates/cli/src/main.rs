use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpp_lab::{registry, run_config, ExperimentConfig};

#[derive(Parser)]
#[command(name = "dpp-lab", version, about = "Determinantal point process experiments")]
struct Cli {
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact directory; defaults to runs/<experiment>-seed<seed>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; overrides the config, 0 means all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the experiment registry.
    ListExperiments,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    match cli.command {
        Command::ListExperiments => {
            print!("{}", registry::listing());
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out, threads } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = threads {
                cfg.threads = (t > 0).then_some(t);
            }
            let out = out.unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", cfg.experiment, cfg.seed)));
            log::info!("running {} with seed {} into {}", cfg.experiment, cfg.seed, out.display());
            match run_config(&cfg, &out) {
                Ok(outcome) => {
                    for a in &outcome.assertions {
                        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.observed);
                    }
                    println!("artifacts in {}", out.display());
                    if outcome.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
