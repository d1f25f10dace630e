//! `persuade`: load an instance (a TOML file or a built-in example), run one
//! analysis, print a report.
//!
//! Exit status is 0 on success, 2 for bad input and 3 when the solver hit an
//! internal consistency failure.

mod commands;
mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use persuasion_core::Error;

pub use format::FORMAT_VERSION;

/// Environment variable naming the directory for files written by
/// `inspect --curve` and `example --write`.
pub const OUTPUT_DIR_ENV: &str = "PERSUADE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "persuade", version, about = "Bayesian persuasion solver and robustness auditor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub output: OutputFormat,

    /// Override the receiver tie tolerance.
    #[arg(long, global = true)]
    pub tol_tie: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Machine,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Maxmin,
    Minregret,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CornerArg {
    Inf,
    Sup,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sender-optimal signal policy.
    Solve {
        /// Instance file, or `example1` / `example2`.
        instance: String,
    },
    /// ROBUST/FRAGILE verdict, with a witness type when a box is given.
    Classify {
        instance: String,
        /// Uniform box width around every receiver utility.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Robust policy search over the utility box.
    Regret {
        instance: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value_t = CriterionArg::Both)]
        criterion: CriterionArg,
        /// Random interior types added to the witness set.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Move the optimal policy to a target receiver type.
    Adjust {
        instance: String,
        /// Instance file whose receiver utilities are the target type.
        #[arg(long, conflicts_with_all = ["delta", "action"])]
        target: Option<PathBuf>,
        /// Box width for a corner target.
        #[arg(long, requires = "action")]
        delta: Option<f64>,
        /// Action whose corner is the target (all other actions take the
        /// opposite bound).
        #[arg(long, requires = "delta")]
        action: Option<usize>,
        #[arg(long, value_enum, default_value_t = CornerArg::Inf)]
        corner: CornerArg,
    },
    /// Monte Carlo stability check on random instances.
    Generic {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        actions: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Best-reply regions, and for two states the value curve.
    Inspect {
        instance: String,
        /// Grid points of the value curve.
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        /// Also write the curve to `<name>_curve.csv` in the output directory.
        #[arg(long)]
        curve: bool,
    },
    /// Print a built-in example in the instance file format.
    Example {
        name: String,
        #[arg(long)]
        delta: Option<f64>,
        /// Write `<name>.toml` to the output directory instead of printing.
        #[arg(long)]
        write: bool,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(report) => match out.write_all(report.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}
