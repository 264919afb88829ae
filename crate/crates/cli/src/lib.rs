//! Command-line front end for concrete and abstract Gaussian-splat rendering.

pub mod abim;
pub mod commands;
pub mod config;
pub mod png_out;

use std::path::Path;

use absplat_core::Error;
use clap::{Args, Parser, Subcommand};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SCENE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(m: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: m.into() }
    }

    pub fn input(m: impl Into<String>) -> Self {
        Self::config(m)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }

    pub fn scene(e: Error) -> Self {
        let code = match e {
            Error::InvalidCamera(_) | Error::InvalidPerturbation(_) | Error::InvalidBox(_) => EXIT_CONFIG,
            Error::Parse { .. } | Error::NonPsdCovariance { .. } | Error::InvalidScene(_) | Error::Io(_) => EXIT_SCENE,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }

    pub fn numeric(e: Error) -> Self {
        match e {
            Error::InvalidCamera(_) | Error::InvalidPerturbation(_) | Error::InvalidBox(_) => Self::scene(e),
            e => Self { code: EXIT_NUMERIC, message: e.to_string() },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "absplat", version, about = "Concrete and abstract Gaussian-splat rendering")]
pub struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    #[arg(long, short)]
    pub config: std::path::PathBuf,
    /// Override a config entry, e.g. `--set perturb.eps_t=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, short, default_value = ".")]
    pub out: std::path::PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the nominal camera concretely.
    Render(RunArgs),
    /// Bound every rendering in the perturbation box.
    Abstract {
        #[command(flatten)]
        run: RunArgs,
        /// Also render this many sampled poses and count containment failures.
        #[arg(long, default_value_t = 0)]
        check: usize,
    },
    /// Empirical per-pixel envelope from uniform samples of the box.
    Sample {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Gap metrics of a bound container.
    Metrics { bounds: std::path::PathBuf },
    /// Report near-singular Gaussians.
    Lint {
        scene: std::path::PathBuf,
        #[arg(long, default_value_t = absplat_core::scene::DEFAULT_CONDITION_THRESHOLD)]
        threshold: f64,
    },
    /// Matrix-inverse enclosure widths for the worked 2×2 example.
    Example1 {
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses `args` (including the program name), runs, prints, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.json;
    match commands::run(cli) {
        Ok(report) => {
            use std::io::Write;
            let out = if json {
                let mut s = serde_json::to_string_pretty(&report.json).expect("report serializes");
                s.push('\n');
                s
            } else {
                report.text
            };
            // a closed pipe (e.g. `| head`) is not an error worth a panic
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
