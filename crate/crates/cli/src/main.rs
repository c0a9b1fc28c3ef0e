mod commands;
mod config;
mod pool;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use config::RunConfig;
use polariton::Error;

/// Exciton-polariton ladder simulator.
///
/// Parameters come from a flat `key = value` file (`--config`) and from
/// `key=value` arguments after the subcommand, which take precedence.
#[derive(Parser, Debug)]
#[command(name = "polariton", version)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV and manifest output.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Worker threads for scan points.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Print the accepted configuration keys and exit.
    #[arg(long)]
    list_keys: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Blueshift per particle over hopping, density or repulsion.
    BlueshiftScan(Overrides),
    /// Density-density correlation profile around a reference site.
    G2(Overrides),
    /// Dynamic structure factor.
    Sqw(Overrides),
    /// Resonant photon response.
    Chi(Overrides),
    /// Blueshift and g² against system size at fixed density.
    FiniteSize(Overrides),
    /// Photonic fraction over hopping.
    PhotonicFraction(Overrides),
    /// Light-matter and left-right entanglement entropy over hopping.
    Entropy(Overrides),
    /// Effective polariton repulsion from the two-body block.
    Upol(Overrides),
}

#[derive(clap::Args, Debug)]
struct Overrides {
    /// `key=value` settings applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &[String]) {
        match self {
            Command::BlueshiftScan(o) => ("blueshift-scan", &o.set),
            Command::G2(o) => ("g2", &o.set),
            Command::Sqw(o) => ("sqw", &o.set),
            Command::Chi(o) => ("chi", &o.set),
            Command::FiniteSize(o) => ("finite-size", &o.set),
            Command::PhotonicFraction(o) => ("photonic-fraction", &o.set),
            Command::Entropy(o) => ("entropy", &o.set),
            Command::Upol(o) => ("upol", &o.set),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } => 3,
        Error::Capacity(_) | Error::Overflow(_) | Error::Dimension { .. } => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_keys {
        for (k, v, help) in config::KEYS {
            println!("{k:16} {:10} {help}", if v.is_empty() { "-" } else { v });
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    let (name, overrides) = command.split();
    let mut cfg = RunConfig::default();
    let loaded = cli
        .config
        .as_ref()
        .map_or(Ok(()), |p| cfg.apply_file(p))
        .and_then(|_| overrides.iter().try_for_each(|kv| cfg.apply_override(kv)));
    if let Err(e) = loaded {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    let ctx = Context {
        command: name.to_string(),
        config: cfg,
        out_dir: cli.out_dir.clone(),
        seed: cli.seed,
        threads: cli.threads.max(1),
    };
    match commands::run(&ctx) {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if outcome.unconverged {
                eprintln!("some DMRG runs did not converge; see the manifest");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
