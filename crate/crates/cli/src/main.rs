use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skspec::{load_config, run, RunOptions, DEFAULT_OUT};

#[derive(Parser)]
#[command(
    name = "skspec",
    version,
    about = "Run simulation and verification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON or TOML config (or a manifest).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: one per core).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; SKSPEC_OUT takes precedence.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        jobs,
        out,
        seed_offset,
    } = Cli::parse().command;
    let raw = match std::fs::read_to_string(&config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match load_config(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let out = std::env::var_os("SKSPEC_OUT")
        .map(PathBuf::from)
        .or(out)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let opts = RunOptions {
        out,
        jobs,
        seed_offset,
    };
    match run(&cfg, &opts) {
        Ok(m) => {
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            for c in &m.checks {
                println!(
                    "{} {} {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.check,
                    c.params
                );
            }
            if let Some(e) = &m.error {
                println!("ABORT {e}");
            }
            println!("manifest: {}", opts.out.join("manifest.json").display());
            ExitCode::from(m.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
