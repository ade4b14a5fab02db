//! Command-line runner: train networks on packet mappings, run the
//! environmental-change scenarios, and answer the Q&A battery.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 budget or constraint
//! failure (training ended below 100% accuracy). Set `NULLSTATE_LOG` for
//! verbosity (`error`..`trace`).

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::FileConfig;
use emit::{EmitFormat, Meta};

#[derive(Parser)]
#[command(name = "nullstate", version, about = "Tagged-packet learning-machine simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fan out over several seeds; outputs land in `<out>/seed-<n>/`.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// File formats to emit.
    #[arg(long, global = true, value_delimiter = ',',
          default_values = ["text", "csv", "json"])]
    emit: Vec<EmitFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network on a packet curriculum and write the checkpoint
    /// and loss history.
    Train,
    /// Run a named scenario (transfer, attachment, grief, grief-response).
    Scenario { name: String },
    /// Answer the four-question battery from a state file or preset.
    Qa,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("NULLSTATE_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let (cfg, config_text) = FileConfig::load(cli.config.as_deref())?;

    let seeds: Vec<u64> = match (&cli.seeds, cli.seed) {
        (Some(list), _) if !list.is_empty() => list.clone(),
        (_, Some(seed)) => vec![seed],
        _ => vec![cfg.seed.unwrap_or(0)],
    };
    let fan_out = seeds.len() > 1;

    let mut exit = 0;
    for seed in seeds {
        let meta = Meta::new(seed, &config_text);
        let out_dir = if fan_out {
            cli.out.join(format!("seed-{seed}"))
        } else {
            cli.out.clone()
        };
        let code = match &cli.command {
            Command::Train => commands::cmd_train(&cfg, &meta, &out_dir, &cli.emit)?,
            Command::Scenario { name } => {
                commands::cmd_scenario(name, &cfg, &meta, &out_dir, &cli.emit)?
            }
            Command::Qa => commands::cmd_qa(&cfg, &meta, &out_dir, &cli.emit)?,
        };
        exit = exit.max(code);
    }
    Ok(exit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
