//! `exfield` command-line front end.

mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exfield::analysis::ToleranceProfile;

#[derive(Debug, Parser)]
#[command(name = "exfield", version, about = "Extremal cluster experiments on lattice random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lattice counts, block families and assumption diagnostics along a scale schedule.
    GeometryReport(Common),
    /// Simulate one replication on the experiment support and dump it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        replication: u64,
    },
    /// Cluster a field CSV under all three cluster definitions.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// Field CSV with columns v_1..v_d,value.
        #[arg(long)]
        field: PathBuf,
    },
    /// Run all replications and evaluate the configured checks.
    Experiment(Common),
    /// Re-summarise a stored replication table.
    Report {
        #[command(flatten)]
        common: Common,
        /// `table.json` written by `experiment`.
        #[arg(long)]
        table: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; all available cores when unset.
    #[arg(long, env = "EXFIELD_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    tolerance_profile: Profile,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    Desk,
    Strict,
}

impl From<Profile> for ToleranceProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Desk => ToleranceProfile::Desk,
            Profile::Strict => ToleranceProfile::Strict,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<exfield::Error> for CliError {
    fn from(e: exfield::Error) -> Self {
        match e {
            exfield::Error::Config(m) => Self::Config(m),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

/// Outcome of a successful run.
pub enum Status {
    Ok,
    ChecksFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::GeometryReport(c) => commands::geometry_report(&c),
        Command::Simulate { common, replication } => commands::simulate(&common, replication),
        Command::Cluster { common, field } => commands::cluster(&common, &field),
        Command::Experiment(c) => commands::experiment(&c),
        Command::Report { common, table } => commands::report(&common, &table),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
