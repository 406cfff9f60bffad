use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dcx_sim::scenarios::SCENARIOS;
use dcx_sim::{run_config, Config, SimError};

#[derive(Parser)]
#[command(name = "dcx-sim", version, about = "Run dcx-order experiments from a config file")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a TOML or JSON config.
    Run {
        config: PathBuf,
        /// Override the config's worker-thread count.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List the available scenarios.
    List,
}

fn run(config: PathBuf, threads: Option<usize>, output_dir: Option<PathBuf>) -> Result<i32, SimError> {
    let mut cfg = Config::load(&config)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    if threads == Some(0) {
        return Err(SimError::Config("`--threads` must be positive".into()));
    }
    let summary = run_config(&cfg, threads)?;
    for r in &summary.results {
        println!(
            "{:<24} {:<13} {:>8.2}s  {}",
            r.report.scenario_id,
            r.report.verdict,
            r.report.runtime_seconds,
            r.json_path.display()
        );
    }
    for (id, msg) in &summary.failures {
        eprintln!("{id}: {msg}");
    }
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            for s in SCENARIOS {
                println!("{:<24} {}", s.id, s.description);
            }
            0
        }
        Command::Run {
            config,
            threads,
            output_dir,
        } => match run(config, threads, output_dir) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("dcx-sim: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
